#include "hartree_lab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace hartree {

namespace {
constexpr double kGL8x[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                             -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                             0.7966664774136267,  0.9602898564975363};
constexpr double kGL8w[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                             0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                             0.2223810344533745, 0.1012285362903763};
}  // namespace

// ---------------------------------------------------------------------------
// graded mesh

GradedMesh GradedMesh::make(double T, int K, double p) {
  std::vector<std::string> bad;
  if (!(T > 0.0 && T <= 1.0)) bad.push_back("mesh final time must satisfy 0 < T <= 1");
  if (K < 8) bad.push_back("mesh needs at least 8 nodes");
  if (!(p >= 1.0)) bad.push_back("grading power must satisfy p >= 1");
  if (!bad.empty()) throw ValidationError(std::move(bad));
  GradedMesh m{T, K, p, {}};
  m.nodes.resize(K);
  for (int k = 1; k <= K; ++k) m.nodes[k - 1] = T * std::pow(static_cast<double>(k) / K, p);
  return m;
}

double GradedMesh::auto_power(const ModelParams& p) {
  const double l1 = p.lambda(1.0);
  if (!(l1 > 0.0)) return 6.0;
  return std::min(6.0, std::ceil(1.0 / l1));
}

std::size_t GradedMesh::index_at_or_below(double t) const {
  auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
  if (it == nodes.begin()) return 0;
  return static_cast<std::size_t>(std::distance(nodes.begin(), it)) - 1;
}

// ---------------------------------------------------------------------------
// cutoff time-integral profile

CutoffIntegralTable::CutoffIntegralTable(double gamma) : gamma_(gamma), segs_(2048) {
  h_ = (hi_ - lo_) / segs_;
  prefix_.assign(segs_ + 1, 0.0);
  prefix_anti_.assign(segs_ + 1, 0.0);
  for (int s = 0; s < segs_; ++s) {
    const double z0 = lo_ + s * h_, z1 = z0 + h_;
    prefix_[s + 1] = prefix_[s] + segment(z0, z1);
    // int_{z0}^{z1} Phi(tau) dtau with Phi linearized through the segment
    // quadrature (Phi is C^1; 8-pt GL on the interpolated values is ample).
    double acc = 0.0;
    for (int q = 0; q < 8; ++q) {
      const double z = z0 + 0.5 * h_ * (kGL8x[q] + 1.0);
      acc += 0.5 * h_ * kGL8w[q] * (prefix_[s] + segment(z0, z));
    }
    prefix_anti_[s + 1] = prefix_anti_[s] + acc;
  }
  phi_total_ = prefix_[segs_];
}

double CutoffIntegralTable::segment(double z0, double z1) const {
  double acc = 0.0;
  for (int q = 0; q < 8; ++q) {
    const double z = z0 + 0.5 * (z1 - z0) * (kGL8x[q] + 1.0);
    acc += 0.5 * (z1 - z0) * kGL8w[q] * std::pow(z, gamma_ - 2.0) * chi_profile(std::sqrt(z));
  }
  return acc;
}

double CutoffIntegralTable::phi(double z) const {
  if (z <= lo_) return (std::pow(z, gamma_ - 1.0) - 1.0) / (gamma_ - 1.0);
  if (z >= hi_) return phi_total_;
  const int s = std::min(segs_ - 1, static_cast<int>((z - lo_) / h_));
  const double z0 = lo_ + s * h_;
  return prefix_[s] + segment(z0, z);
}

double CutoffIntegralTable::phi_anti(double z) const {
  const double g = gamma_;
  if (z <= lo_) {
    // int_1^z (tau^{g-1} - 1)/(g-1) dtau
    return ((std::pow(z, g) - 1.0) / g - (z - 1.0)) / (g - 1.0);
  }
  if (z >= hi_) return prefix_anti_[segs_] + phi_total_ * (z - hi_);
  const int s = std::min(segs_ - 1, static_cast<int>((z - lo_) / h_));
  const double z0 = lo_ + s * h_;
  double acc = prefix_anti_[s];
  for (int q = 0; q < 8; ++q) {
    const double zz = z0 + 0.5 * (z - z0) * (kGL8x[q] + 1.0);
    acc += 0.5 * (z - z0) * kGL8w[q] * (prefix_[s] + segment(z0, zz));
  }
  return acc;
}

double CutoffIntegralTable::integral(double ksq, double t) const {
  if (!(t > 0.0)) throw DomainError("cutoff integral requires t > 0");
  if (t >= 1.0) return 0.0;
  if (ksq <= 0.0) return 0.0; // zero mode carries no Riesz content
  const double s = std::pow(ksq, 1.0 - gamma_);
  return s * (phi(ksq) - phi(ksq * t));
}

double CutoffIntegralTable::integral_avg(double ksq, double a, double b) const {
  if (ksq <= 0.0) return 0.0;
  if (a == b) return integral(ksq, a);
  const double s = std::pow(ksq, 1.0 - gamma_);
  // (1/(b-a)) int_a^b [Phi(ksq) - Phi(ksq t)] dt
  const double anti = (phi_anti(ksq * b) - phi_anti(ksq * a)) / (ksq * (b - a));
  return s * (phi(ksq) - anti);
}

namespace {
std::mutex table_mutex;
std::map<double, std::shared_ptr<const CutoffIntegralTable>> table_cache;

std::shared_ptr<const CutoffIntegralTable> table_for(double gamma) {
  std::scoped_lock lock(table_mutex);
  auto it = table_cache.find(gamma);
  if (it != table_cache.end()) return it->second;
  auto t = std::make_shared<const CutoffIntegralTable>(gamma);
  table_cache.emplace(gamma, t);
  return t;
}

std::vector<cd> g0_coefficients(const SpectralField& v0, const ModelParams& p) {
  const auto& g = v0.grid();
  std::vector<cd> w2(g.size());
  for (std::size_t i = 0; i < w2.size(); ++i) w2[i] = cd{std::norm(v0.values()[i]), 0.0};
  std::vector<cd> c(g.size());
  fft::forward(g, w2, c);
  spectral::dealias(g, c);
  std::vector<cd> out(g.size());
  hartree_multiplier(g, p, c, out, std::nullopt);
  return out;
}

// log-t trapezoid weight of the cell [t0, t1] attributed as (f0*t0 + f1*t1)/2 * dlog
inline double logtrap_w(double t0, double t1) { return 0.5 * (std::log(t1) - std::log(t0)); }
}  // namespace

// ---------------------------------------------------------------------------
// profile evaluation

void AsymptoticProfile::phi0_hat(double t, std::span<cd> out) const {
  const auto& ksq = mode_tables(grid).ksq;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -g0_hat[i] * table->integral(ksq[i], t);
}

void AsymptoticProfile::phi0_hat_avg(double a, double b, std::span<cd> out) const {
  const auto& ksq = mode_tables(grid).ksq;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -g0_hat[i] * table->integral_avg(ksq[i], a, b);
}

namespace {
// log-t linear interpolation of per-node coefficient arrays
void interp_nodes(const GradedMesh& mesh, const std::vector<std::vector<cd>>& data, double t,
                  std::span<cd> out, std::atomic<long>* flag) {
  const auto& ts = mesh.nodes;
  if (data.empty()) {
    std::fill(out.begin(), out.end(), cd{0.0, 0.0});
    return;
  }
  if (t <= ts.front()) {
    std::copy(data.front().begin(), data.front().end(), out.begin());
    return;
  }
  if (t >= ts.back()) {
    std::copy(data.back().begin(), data.back().end(), out.begin());
    return;
  }
  std::size_t i = mesh.index_at_or_below(t);
  if (ts[i] == t) {
    std::copy(data[i].begin(), data[i].end(), out.begin());
    return;
  }
  if (flag) flag->fetch_add(1, std::memory_order_relaxed);
  const double w = (std::log(t) - std::log(ts[i])) / (std::log(ts[i + 1]) - std::log(ts[i]));
  const auto& lo = data[i];
  const auto& hi = data[i + 1];
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = (1.0 - w) * lo[j] + w * hi[j];
}
}  // namespace

void AsymptoticProfile::phibc_hat(double t, std::span<cd> out) const {
  std::fill(out.begin(), out.end(), cd{0.0, 0.0});
  if (level == 0) return;
  std::vector<cd> tmp(out.size());
  interp_nodes(mesh, phib_hat, t, tmp, interp_uses.get());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += tmp[i];
  interp_nodes(mesh, phic_hat, t, tmp, interp_uses.get());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += tmp[i];
}

void AsymptoticProfile::phase_hat(double t, std::span<cd> out) const {
  phi0_hat(t, out);
  if (level == 0) return;
  std::vector<cd> tmp(out.size());
  phibc_hat(t, tmp);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += tmp[i];
}

void AsymptoticProfile::va_hat_at(double t, std::span<cd> out) const {
  if (level == 0 || va_hat.empty()) {
    fft::forward(grid, v0.values(), out);
    return;
  }
  interp_nodes(mesh, va_hat, t, out, interp_uses.get());
}

namespace {
VectorField gradient_of_hat(const GridSpec& g, std::span<const cd> phihat) {
  std::vector<SpectralField> comps;
  comps.reserve(g.rank);
  std::vector<cd> work(phihat.size());
  for (int d = 0; d < g.rank; ++d) {
    spectral::gradient_component(g, phihat, work, d);
    comps.push_back(to_physical(g, work));
  }
  return VectorField(std::move(comps));
}
}  // namespace

VectorField AsymptoticProfile::s0_field(double t) const {
  std::vector<cd> ph(grid.size());
  phi0_hat(t, ph);
  return gradient_of_hat(grid, ph);
}

VectorField AsymptoticProfile::s_total_field(double t) const {
  std::vector<cd> ph(grid.size());
  phase_hat(t, ph);
  return gradient_of_hat(grid, ph);
}

SpectralField AsymptoticProfile::phase_field(double t) const {
  std::vector<cd> ph(grid.size());
  phase_hat(t, ph);
  return to_physical(grid, ph);
}

SpectralField AsymptoticProfile::phi0_field(double t) const {
  std::vector<cd> ph(grid.size());
  phi0_hat(t, ph);
  return to_physical(grid, ph);
}

SpectralField AsymptoticProfile::phib_field(double t) const {
  std::vector<cd> ph(grid.size(), cd{0, 0});
  if (level >= 1) interp_nodes(mesh, phib_hat, t, ph, interp_uses.get());
  return to_physical(grid, ph);
}

SpectralField AsymptoticProfile::phic_field(double t) const {
  std::vector<cd> ph(grid.size(), cd{0, 0});
  if (level >= 1) interp_nodes(mesh, phic_hat, t, ph, interp_uses.get());
  return to_physical(grid, ph);
}

SpectralField AsymptoticProfile::va_field(double t) const {
  std::vector<cd> c(grid.size());
  va_hat_at(t, c);
  return to_physical(grid, c);
}

// ---------------------------------------------------------------------------
// standalone s_0

VectorField compute_s0(const SpectralField& v0, double t, const ModelParams& p) {
  if (!(t > 0.0)) throw DomainError("compute_s0 requires t > 0");
  if (t > 1.0) throw DomainError("compute_s0 requires t <= 1");
  v0.require_finite("compute_s0");
  const auto& g = v0.grid();
  auto g0 = g0_coefficients(v0, p);
  auto tab = table_for(p.gamma);
  const auto& ksq = mode_tables(g).ksq;
  std::vector<cd> ph(g.size());
  for (std::size_t i = 0; i < ph.size(); ++i) ph[i] = -g0[i] * tab->integral(ksq[i], t);
  return gradient_of_hat(g, ph);
}

// ---------------------------------------------------------------------------
// transport solve for v_a:  d_t v = s0 . grad v + (1/2)(div s0) v.
// Stepping: the generator is frozen per step with the exactly time-averaged
// s0 (the Magnus-1 term), applied through a degree-8 Taylor exponential. The
// frozen generator is skew-adjoint on the dealiased band, so the L^2 norm is
// conserved to roundoff.

namespace {

struct TransportWork {
  const GridSpec& g;
  std::vector<std::vector<cd>> grad;  // work buffers per dim
  std::vector<cd> w, coefw, vphys;
  std::vector<std::vector<double>> svel_re; // velocity components (real part)
  std::vector<double> sdiv_re;
  explicit TransportWork(const GridSpec& gr)
      : g(gr), grad(gr.rank, std::vector<cd>(gr.size())), w(gr.size()), coefw(gr.size()),
        vphys(gr.size()), svel_re(gr.rank, std::vector<double>(gr.size())), sdiv_re(gr.size()) {}

  /// load velocity from a phase coefficient array: s = grad phi, div s = Lap phi
  void load_velocity(std::span<const cd> phihat) {
    const auto& tab = mode_tables(g);
    for (int d = 0; d < g.rank; ++d) {
      spectral::gradient_component(g, phihat, coefw, d);
      fft::inverse(g, coefw, grad[d]);
      for (std::size_t i = 0; i < coefw.size(); ++i) svel_re[d][i] = grad[d][i].real();
    }
    for (std::size_t i = 0; i < coefw.size(); ++i) coefw[i] = -tab.ksq[i] * phihat[i];
    fft::inverse(g, coefw, w);
    for (std::size_t i = 0; i < w.size(); ++i) sdiv_re[i] = w[i].real();
  }

  /// out = dealias(s . grad v + (1/2)(div s) v), coefficient -> coefficient
  void apply_generator(std::span<const cd> vhat, std::span<cd> out) {
    std::fill(w.begin(), w.end(), cd{0.0, 0.0});
    for (int d = 0; d < g.rank; ++d) {
      spectral::gradient_component(g, vhat, coefw, d);
      fft::inverse(g, coefw, grad[d]);
    }
    fft::inverse(g, vhat, vphys);
    for (std::size_t i = 0; i < w.size(); ++i) {
      cd acc = 0.5 * sdiv_re[i] * vphys[i];
      for (int d = 0; d < g.rank; ++d) acc += svel_re[d][i] * grad[d][i];
      w[i] = acc;
    }
    fft::forward(g, w, out);
    spectral::dealias(g, out);
  }

  /// vhat <- Taylor_8(dt * A) vhat
  void exp_step(std::vector<cd>& vhat, double dt, int order) {
    std::vector<cd> term = vhat, next(vhat.size());
    for (int j = 1; j <= order; ++j) {
      apply_generator(term, next);
      const double c = dt / j;
      for (std::size_t i = 0; i < vhat.size(); ++i) {
        next[i] *= c;
        vhat[i] += next[i];
      }
      term.swap(next);
    }
  }
};

}  // namespace

std::vector<std::vector<cd>> solve_transport_va(const SpectralField& v0, const GradedMesh& mesh,
                                                const ModelParams& p) {
  v0.require_finite("solve_transport_va");
  const auto& g = v0.grid();
  const double a0 = sobolev_norm(v0, NormSpec::sobolev(p.rho));
  auto g0 = g0_coefficients(v0, p);
  auto tab = table_for(p.gamma);
  const auto& ksq = mode_tables(g).ksq;

  std::vector<cd> vhat(g.size());
  fft::forward(g, v0.values(), vhat);
  spectral::dealias(g, vhat);

  std::vector<std::vector<cd>> out;
  out.reserve(mesh.nodes.size());
  out.push_back(vhat);

  TransportWork work(g);
  std::vector<cd> phavg(g.size());
  for (std::size_t k = 0; k + 1 < mesh.nodes.size(); ++k) {
    const double a = mesh.nodes[k], b = mesh.nodes[k + 1];
    for (std::size_t i = 0; i < phavg.size(); ++i)
      phavg[i] = -g0[i] * tab->integral_avg(ksq[i], a, b);
    work.load_velocity(phavg);
    work.exp_step(vhat, b - a, 8);
    out.push_back(vhat);
    const double nr = spectral::weighted_norm(g, vhat, p.rho, false);
    if (!(nr < 1e6 * std::max(a0, 1e-300)))
      throw DivergenceError("transport solve for v_a left the admissible ball (H^rho norm " +
                            std::to_string(nr) + ")");
  }
  return out;
}

// ---------------------------------------------------------------------------
// profile assembly

AsymptoticProfile iterate_approximation(int m, const SpectralField& v0_in, const GradedMesh& mesh,
                                        const ModelParams& p) {
  if (m != 0 && m != 1)
    throw UnsupportedLevelError("approximation level must be 0 or 1, got " + std::to_string(m));
  v0_in.require_finite("iterate_approximation");

  const auto& g = v0_in.grid();
  if (g.rank != p.n) throw ShapeError("grid rank does not match model dimension");
  // the phase corrections must vanish at t = 1, so the profile mesh ends there
  if (m == 1 && std::abs(mesh.final_time - 1.0) > 1e-12)
    throw DomainError("level-1 profiles require a mesh with final time 1");

  AsymptoticProfile prof;
  prof.level = m;
  prof.grid = g;
  prof.params = p;
  prof.mesh = mesh;
  prof.interp_uses = std::make_shared<std::atomic<long>>(0);

  // band-limit the datum once so that every product downstream is alias-free
  std::vector<cd> v0hat(g.size());
  fft::forward(g, v0_in.values(), v0hat);
  spectral::dealias(g, v0hat);
  prof.v0 = to_physical(g, v0hat);
  prof.a0 = sobolev_norm(prof.v0, NormSpec::sobolev(p.rho));
  prof.g0_hat = g0_coefficients(prof.v0, p);
  prof.table = table_for(p.gamma);
  prof.committed_t1_error = std::pow(mesh.nodes.front(), std::max(p.lambda(1.0), 0.0));

  if (m == 0) return prof;

  // v_a by transport, then the two phase corrections by suffix trapezoid in log t
  prof.va_hat = solve_transport_va(prof.v0, mesh, p);

  const std::size_t K = mesh.nodes.size();
  const std::size_t sz = g.size();
  const auto& ksq = mode_tables(g).ksq;

  // integrand_b(l) = coefficients of |s_0(t_l)|^2
  // integrand_c(l) = coefficients of t^{gamma-2} (g_L(v_a) - g_L(v_0))(t_l)
  std::vector<std::vector<cd>> qb(K), qc(K);
  {
    std::vector<cd> ph(sz), cw(sz);
    std::vector<std::vector<cd>> grad(g.rank, std::vector<cd>(sz));
    std::vector<cd> w2_0(sz);
    // |v0|^2 coefficients for the difference
    {
      std::vector<cd> tmp(sz);
      for (std::size_t i = 0; i < sz; ++i) tmp[i] = cd{std::norm(prof.v0.values()[i]), 0.0};
      fft::forward(g, tmp, w2_0);
      spectral::dealias(g, w2_0);
    }
    std::vector<cd> vaphys(sz), w2(sz);
    for (std::size_t l = 0; l < K; ++l) {
      const double t = mesh.nodes[l];
      // s_0(t_l)
      for (std::size_t i = 0; i < sz; ++i) ph[i] = -prof.g0_hat[i] * prof.table->integral(ksq[i], t);
      for (int d = 0; d < g.rank; ++d) {
        spectral::gradient_component(g, ph, cw, d);
        fft::inverse(g, cw, grad[d]);
      }
      std::vector<cd> s0sq(sz);
      for (std::size_t i = 0; i < sz; ++i) {
        double acc = 0.0;
        for (int d = 0; d < g.rank; ++d) acc += std::norm(grad[d][i]);
        s0sq[i] = cd{acc, 0.0};
      }
      qb[l].resize(sz);
      fft::forward(g, s0sq, qb[l]);
      spectral::dealias(g, qb[l]);

      fft::inverse(g, prof.va_hat[l], vaphys);
      for (std::size_t i = 0; i < sz; ++i) w2[i] = cd{std::norm(vaphys[i]), 0.0};
      std::vector<cd> w2hat(sz);
      fft::forward(g, w2, w2hat);
      spectral::dealias(g, w2hat);
      for (std::size_t i = 0; i < sz; ++i) w2hat[i] -= w2_0[i];
      qc[l].resize(sz);
      hartree_multiplier(g, p, w2hat, qc[l], t);
      const double pref = std::pow(t, p.gamma - 2.0);
      for (std::size_t i = 0; i < sz; ++i) qc[l][i] *= pref;
    }
  }

  // suffix trapezoid in log t:  phi_b = -(1/2) int_t^1 |s0|^2,  phi_c = -int_t^1 q_c
  prof.phib_hat.assign(K, std::vector<cd>(sz, cd{0.0, 0.0}));
  prof.phic_hat.assign(K, std::vector<cd>(sz, cd{0.0, 0.0}));
  for (std::size_t l = K - 1; l-- > 0;) {
    const double t0 = mesh.nodes[l], t1 = mesh.nodes[l + 1];
    const double w = logtrap_w(t0, t1);
    for (std::size_t i = 0; i < sz; ++i) {
      prof.phib_hat[l][i] =
          prof.phib_hat[l + 1][i] - 0.5 * w * (qb[l][i] * t0 + qb[l + 1][i] * t1);
      prof.phic_hat[l][i] =
          prof.phic_hat[l + 1][i] - w * (qc[l][i] * t0 + qc[l + 1][i] * t1);
    }
  }
  for (std::size_t l = 0; l < K; ++l)
    for (std::size_t i = 0; i < sz; ++i) prof.phib_hat[l][i] *= 0.5;

  return prof;
}

// ---------------------------------------------------------------------------
// s_b / s_c accessors and the double-integral cross-check

namespace {
VectorField gradient_of_nodes(const AsymptoticProfile& prof,
                              const std::vector<std::vector<cd>>& data, double t) {
  std::vector<cd> ph(prof.grid.size(), cd{0.0, 0.0});
  if (prof.level >= 1 && !data.empty())
    interp_nodes(prof.mesh, data, t, ph, prof.interp_uses.get());
  return gradient_of_hat(prof.grid, ph);
}
}  // namespace

VectorField compute_sb(const AsymptoticProfile& prof, double t) {
  if (!(t > 0.0)) throw DomainError("compute_sb requires t > 0");
  return gradient_of_nodes(prof, prof.phib_hat, t);
}

VectorField compute_sc(const AsymptoticProfile& prof, double t) {
  if (!(t > 0.0)) throw DomainError("compute_sc requires t > 0");
  return gradient_of_nodes(prof, prof.phic_hat, t);
}

VectorField compute_sc_double_integral(const AsymptoticProfile& prof, double t) {
  if (!(t > 0.0)) throw DomainError("compute_sc requires t > 0");
  if (prof.level == 0) return VectorField(prof.grid);
  const auto& g = prof.grid;
  const auto& mesh = prof.mesh;
  const std::size_t K = mesh.nodes.size(), sz = g.size();
  const auto& p = prof.params;
  const auto& ksq = mode_tables(g).ksq;

  // inner cumulative J(t') = int_0^{t'} div(s_0 |v_a|^2) dt'' (prefix trapezoid)
  std::vector<cd> ph(sz), cw(sz), inner(sz, cd{0.0, 0.0}), prev(sz, cd{0.0, 0.0});
  std::vector<std::vector<cd>> grad(g.rank, std::vector<cd>(sz));
  std::vector<cd> vaphys(sz);
  std::vector<cd> outer(sz, cd{0.0, 0.0});
  std::vector<cd> prev_outer_integrand(sz, cd{0.0, 0.0});
  bool have_prev_outer = false;
  std::vector<cd> cur(sz);

  for (std::size_t l = 0; l < K; ++l) {
    const double tl = mesh.nodes[l];
    for (std::size_t i = 0; i < sz; ++i) ph[i] = -prof.g0_hat[i] * prof.table->integral(ksq[i], tl);
    for (int d = 0; d < g.rank; ++d) {
      spectral::gradient_component(g, ph, cw, d);
      fft::inverse(g, cw, grad[d]);
    }
    fft::inverse(g, prof.va_hat[l], vaphys);
    // div(s_0 |v_a|^2): build the flux components, take the divergence spectrally
    std::vector<cd> flux(sz), dive(sz, cd{0.0, 0.0});
    for (int d = 0; d < g.rank; ++d) {
      for (std::size_t i = 0; i < sz; ++i) flux[i] = grad[d][i] * std::norm(vaphys[i]);
      fft::forward(g, flux, cw);
      spectral::dealias(g, cw);
      spectral::add_divergence_term(g, cw, dive, d);
    }
    if (l > 0) {
      const double t0 = mesh.nodes[l - 1];
      const double w = logtrap_w(t0, tl);
      for (std::size_t i = 0; i < sz; ++i) inner[i] += 0.5 * w * (prev[i] * t0 + dive[i] * tl);
    }
    prev = dive;

    if (tl + 1e-15 >= t) {
      // outer integrand at t_l: t^{gamma-2} kappa c chi_L(t_l) omega^{gamma-n} J(t_l)
      hartree_multiplier(g, p, inner, cur, tl);
      const double pref = std::pow(tl, p.gamma - 2.0);
      for (std::size_t i = 0; i < sz; ++i) cur[i] *= pref;
      if (have_prev_outer) {
        const double t0 = mesh.nodes[l - 1];
        const double w = logtrap_w(t0, tl);
        for (std::size_t i = 0; i < sz; ++i)
          outer[i] += 0.5 * w * (prev_outer_integrand[i] * t0 + cur[i] * tl);
      }
      prev_outer_integrand = cur;
      have_prev_outer = true;
    }
  }
  // s_c = -grad of (-outer)  ==  grad(outer)... sign: s_c = -grad int_t^1 (...)
  for (std::size_t i = 0; i < sz; ++i) outer[i] = -outer[i];
  return gradient_of_hat(g, outer);
}

PhaseParts compute_phase(const AsymptoticProfile& prof, double t) {
  if (!(t > 0.0)) throw DomainError("compute_phase requires t > 0");
  PhaseParts parts{prof.phase_field(t), prof.phi0_field(t), prof.phib_field(t),
                   prof.phic_field(t)};
  return parts;
}

}  // namespace hartree
