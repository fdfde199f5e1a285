#include "hartree_lab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hartree {

// ---------------------------------------------------------------------------
// log-log fit

FitResult fit_decay_exponent(std::span<const double> t, std::span<const double> value,
                             double t_lo, double t_hi) {
  if (t.size() != value.size()) throw ShapeError("fit: mismatched series lengths");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(value[i] > 0.0)) throw DomainError("fit: nonpositive value inside the fit window");
    xs.push_back(std::log(t[i]));
    ys.push_back(std::log(value[i]));
  }
  const int n = static_cast<int>(xs.size());
  if (n < 8) throw DomainError("fit: need at least 8 samples in the window, got " + std::to_string(n));
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  FitResult r;
  r.npoints = n;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = ys[i] - (r.intercept + r.slope * xs[i]);
    ss += e * e;
  }
  const double var = n > 2 ? ss / (n - 2) : 0.0;
  r.ci95 = 1.96 * std::sqrt(var / sxx);
  return r;
}

ExponentReport verify_bound(std::string quantity, std::string norm_desc,
                            std::span<const double> t, std::span<const double> value,
                            double predicted, double band_limit, double slope_tol, double t_lo,
                            double t_hi, bool band_only) {
  ExponentReport rep;
  rep.quantity = std::move(quantity);
  rep.norm_desc = std::move(norm_desc);
  rep.predicted = predicted;
  rep.band_limit = band_limit;
  rep.slope_tol = slope_tol;
  rep.band_only = band_only;
  rep.window_lo = t_lo;
  rep.window_hi = t_hi;

  double bmin = 0.0, bmax = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(value[i] > 0.0)) throw DomainError("verify_bound: nonpositive value in window");
    const double nv = value[i] * std::pow(t[i], -predicted);
    if (!any) {
      bmin = bmax = nv;
      any = true;
    } else {
      bmin = std::min(bmin, nv);
      bmax = std::max(bmax, nv);
    }
  }
  if (!any) throw DomainError("verify_bound: empty fit window");
  rep.band_ratio = bmax / bmin;
  rep.fit = fit_decay_exponent(t, value, t_lo, t_hi);
  return rep;
}

// ---------------------------------------------------------------------------
// remainder decomposition

namespace {

inline double logtrap_w(double t0, double t1) { return 0.5 * (std::log(t1) - std::log(t0)); }

struct CumTrap {
  // prefix cumulative of a coefficient-array integrand, trapezoid in log t
  std::vector<cd> acc, prev;
  bool started = false;
  double tprev = 0.0;
  explicit CumTrap(std::size_t n) : acc(n, cd{0, 0}), prev(n, cd{0, 0}) {}
  void push(double t, const std::vector<cd>& cur) {
    if (started) {
      const double w = logtrap_w(tprev, t);
      for (std::size_t i = 0; i < acc.size(); ++i)
        acc[i] += w * (prev[i] * tprev + cur[i] * t);
    }
    prev = cur;
    tprev = t;
    started = true;
  }
};

struct PsiFamily {
  std::vector<std::vector<cd>> psi_hat;
  std::array<double, 3> denom{};  // || omega^{3-2s+n/2} psi ||
  PsiFamily(const GridSpec& g, const ModelParams& p, const std::array<double, 3>& widths,
            double sigma) {
    for (int w = 0; w < 3; ++w) {
      SpectralField psi(g);
      const double s2 = 2.0 * widths[w] * widths[w];
      const int N = g.points;
      std::vector<int> idx(g.rank, 0);
      for (std::size_t f = 0; f < g.size(); ++f) {
        double r2 = 0.0;
        for (int d = 0; d < g.rank; ++d) {
          const double x = g.coord(idx[d]);
          r2 += x * x;
        }
        psi.values()[f] = std::exp(-r2 / s2);
        for (int d = g.rank - 1; d >= 0; --d) {
          if (++idx[d] < N) break;
          idx[d] = 0;
        }
      }
      std::vector<cd> ph(g.size());
      fft::forward(g, psi.values(), ph);
      spectral::dealias(g, ph);
      const double l2 = spectral::norm(g, ph);
      for (auto& c : ph) c /= l2;
      denom[w] = spectral::weighted_norm(g, ph, 3.0 - 2.0 * sigma + 0.5 * p.n, true);
      psi_hat.push_back(std::move(ph));
    }
  }
};

double pairing_abs(const GridSpec& g, const std::vector<cd>& ahat, const std::vector<cd>& bhat) {
  cd acc{0.0, 0.0};
  for (std::size_t i = 0; i < ahat.size(); ++i) acc += std::conj(ahat[i]) * bhat[i];
  return std::abs(acc) * g.box_volume();
}

}  // namespace

VDecomposition compute_v_decomposition(const Trajectory& v_traj, const AsymptoticProfile& prof,
                                       const ModelParams& p, const DecompositionOptions& opt) {
  const auto& g = prof.grid;
  if (!(v_traj.grid == g)) throw ShapeError("decomposition: trajectory grid mismatch");
  const auto& mesh = v_traj.mesh;
  const std::size_t K = mesh.nodes.size(), sz = g.size();
  const double sig = opt.sigma > 0.0 ? opt.sigma : p.rho;
  const double sigp = opt.sigma_prime > 0.0 ? opt.sigma_prime : p.rho;
  const double n2 = 0.5 * p.n;

  VDecomposition out;
  out.times = mesh.nodes;
  out.v1_norm.resize(K);
  out.v2_norm.resize(K);
  out.v3_norm.resize(K);
  out.v5_norm.resize(K);
  out.v4_pairing.resize(K);
  out.residual_identity.resize(K);
  out.subdecomp_defect.resize(K);
  out.cut_v1.resize(K);
  out.cut_v3.resize(K);
  out.cut_v4.resize(K);
  out.cut_v5.resize(K);

  PsiFamily psi(g, p, opt.psi_widths, sig);
  const auto& ksq = mode_tables(g).ksq;

  CumTrap A1(sz);
  std::vector<CumTrap> A2, A3, A4, A5;
  for (int d = 0; d < g.rank; ++d) {
    A2.emplace_back(sz);
    A3.emplace_back(sz);
    A4.emplace_back(sz);
    A5.emplace_back(sz);
  }

  std::vector<cd> ph(sz), ph0(sz), cw(sz), vphys(sz), vaphys(sz), dv(sz);
  std::vector<std::vector<cd>> sfull(g.rank, std::vector<cd>(sz)), s0(g.rank, std::vector<cd>(sz));
  std::vector<cd> q(sz), V1hat(sz), V2hat(sz), V3hat(sz), V4hat(sz), V5hat(sz);
  std::vector<cd> V1phys(sz), V2phys(sz), w2diff(sz);

  auto divergence_of = [&](const std::vector<CumTrap>& A, std::vector<cd>& out_hat) {
    std::fill(out_hat.begin(), out_hat.end(), cd{0, 0});
    for (int d = 0; d < g.rank; ++d) spectral::add_divergence_term(g, A[d].acc, out_hat, d);
  };
  auto cut_norm = [&](const std::vector<cd>& vhat, double t) {
    std::vector<cd> tmp = vhat;
    spectral::chi_low(g, tmp, t);
    return std::pow(t, p.gamma - 2.0) *
           spectral::weighted_norm(g, tmp, p.gamma - sigp - n2, true);
  };

  for (std::size_t l = 0; l < K; ++l) {
    const double t = mesh.nodes[l];
    const auto& vhat = v_traj.states_hat[l];
    fft::inverse(g, vhat, vphys);
    for (std::size_t i = 0; i < sz; ++i) cw[i] = -ksq[i] * vhat[i];
    fft::inverse(g, cw, dv);

    prof.va_hat_at(t, cw);
    fft::inverse(g, cw, vaphys);

    prof.phase_hat(t, ph);
    prof.phi0_hat(t, ph0);
    for (int d = 0; d < g.rank; ++d) {
      spectral::gradient_component(g, ph, cw, d);
      fft::inverse(g, cw, sfull[d]);
      spectral::gradient_component(g, ph0, cw, d);
      fft::inverse(g, cw, s0[d]);
    }

    // V1 integrand: Im(conj v * Delta v)
    for (std::size_t i = 0; i < sz; ++i)
      q[i] = cd{std::imag(std::conj(vphys[i]) * dv[i]), 0.0};
    fft::forward(g, q, cw);
    spectral::dealias(g, cw);
    A1.push(t, cw);
    for (std::size_t i = 0; i < sz; ++i) V1hat[i] = -A1.acc[i];

    // V2 / V3 integrands per component
    for (int d = 0; d < g.rank; ++d) {
      for (std::size_t i = 0; i < sz; ++i)
        q[i] = cd{sfull[d][i].real() * std::norm(vphys[i]) -
                      s0[d][i].real() * std::norm(vaphys[i]),
                  0.0};
      fft::forward(g, q, cw);
      spectral::dealias(g, cw);
      A2[d].push(t, cw);
      for (std::size_t i = 0; i < sz; ++i)
        q[i] = cd{(sfull[d][i].real() - s0[d][i].real()) * std::norm(vphys[i]), 0.0};
      fft::forward(g, q, cw);
      spectral::dealias(g, cw);
      A3[d].push(t, cw);
    }
    divergence_of(A2, V2hat);
    divergence_of(A3, V3hat);
    fft::inverse(g, V1hat, V1phys);
    fft::inverse(g, V2hat, V2phys);

    // V4 / V5 integrands use the current cumulative V1, V2
    for (int d = 0; d < g.rank; ++d) {
      for (std::size_t i = 0; i < sz; ++i)
        q[i] = cd{s0[d][i].real() * V1phys[i].real(), 0.0};
      fft::forward(g, q, cw);
      spectral::dealias(g, cw);
      A4[d].push(t, cw);
      for (std::size_t i = 0; i < sz; ++i)
        q[i] = cd{s0[d][i].real() * V2phys[i].real(), 0.0};
      fft::forward(g, q, cw);
      spectral::dealias(g, cw);
      A5[d].push(t, cw);
    }
    divergence_of(A4, V4hat);
    divergence_of(A5, V5hat);

    // emissions
    out.v1_norm[l] = spectral::weighted_norm(g, V1hat, 2.0 * sig - 2.0 - n2, true);
    out.v2_norm[l] = spectral::weighted_norm(g, V2hat, 2.0 * sig - 1.0 - n2, true);
    out.v3_norm[l] = spectral::weighted_norm(g, V3hat, 2.0 * sig - 1.0 - n2, true);
    out.v5_norm[l] = spectral::weighted_norm(g, V5hat, 2.0 * sig - 2.0 - n2, true);
    for (int w = 0; w < 3; ++w)
      out.v4_pairing[l][w] = pairing_abs(g, psi.psi_hat[w], V4hat) / psi.denom[w];

    for (std::size_t i = 0; i < sz; ++i)
      q[i] = cd{std::norm(vphys[i]) - std::norm(vaphys[i]), 0.0};
    fft::forward(g, q, cw);
    spectral::dealias(g, cw);
    for (std::size_t i = 0; i < sz; ++i) cw[i] -= V1hat[i] + V2hat[i];
    out.residual_identity[l] = spectral::norm(g, cw);
    for (std::size_t i = 0; i < sz; ++i) cw[i] = V2hat[i] - V3hat[i] - V4hat[i] - V5hat[i];
    out.subdecomp_defect[l] = spectral::norm(g, cw);

    out.cut_v1[l] = cut_norm(V1hat, t);
    out.cut_v3[l] = cut_norm(V3hat, t);
    out.cut_v4[l] = cut_norm(V4hat, t);
    out.cut_v5[l] = cut_norm(V5hat, t);
  }
  out.sup_identity_residual =
      *std::max_element(out.residual_identity.begin(), out.residual_identity.end());
  out.sup_subdecomp_defect =
      *std::max_element(out.subdecomp_defect.begin(), out.subdecomp_defect.end());
  return out;
}

VDecompositionDiff compute_v_decomposition_diff(const Trajectory& v1, const Trajectory& v2,
                                                const AsymptoticProfile& prof, const ModelParams& p,
                                                const DecompositionOptions& opt) {
  const auto& g = prof.grid;
  if (v1.states_hat.size() != v2.states_hat.size())
    throw ShapeError("difference decomposition: meshes differ");
  const auto& mesh = v1.mesh;
  const std::size_t K = mesh.nodes.size(), sz = g.size();
  const double sig = opt.sigma > 0.0 ? opt.sigma : p.rho;
  const double n2 = 0.5 * p.n;
  const auto& ksq = mode_tables(g).ksq;

  VDecompositionDiff out;
  out.times = mesh.nodes;
  out.v1_norm.resize(K);
  out.v2_norm.resize(K);
  out.v3_norm.resize(K);
  out.v5_norm.resize(K);
  out.residual_identity.resize(K);

  CumTrap A1(sz);
  std::vector<CumTrap> A2, A3, A5;
  for (int d = 0; d < g.rank; ++d) {
    A2.emplace_back(sz);
    A3.emplace_back(sz);
    A5.emplace_back(sz);
  }

  std::vector<cd> ph(sz), ph0(sz), cw(sz), vp1(sz), vp2(sz), dplus(sz), dminus(sz), q(sz);
  std::vector<std::vector<cd>> sfull(g.rank, std::vector<cd>(sz)), s0(g.rank, std::vector<cd>(sz));
  std::vector<cd> V1hat(sz), V2hat(sz), V2phys(sz);

  for (std::size_t l = 0; l < K; ++l) {
    const double t = mesh.nodes[l];
    fft::inverse(g, v1.states_hat[l], vp1);
    fft::inverse(g, v2.states_hat[l], vp2);
    // v_plus/v_minus physical and their Laplacians
    std::vector<cd> vplus(sz), vminus(sz);
    for (std::size_t i = 0; i < sz; ++i) {
      vplus[i] = 0.5 * (vp2[i] + vp1[i]);
      vminus[i] = 0.5 * (vp2[i] - vp1[i]);
    }
    for (std::size_t i = 0; i < sz; ++i)
      cw[i] = -ksq[i] * 0.5 * (v2.states_hat[l][i] + v1.states_hat[l][i]);
    fft::inverse(g, cw, dplus);
    for (std::size_t i = 0; i < sz; ++i)
      cw[i] = -ksq[i] * 0.5 * (v2.states_hat[l][i] - v1.states_hat[l][i]);
    fft::inverse(g, cw, dminus);

    prof.phase_hat(t, ph);
    prof.phi0_hat(t, ph0);
    for (int d = 0; d < g.rank; ++d) {
      spectral::gradient_component(g, ph, cw, d);
      fft::inverse(g, cw, sfull[d]);
      spectral::gradient_component(g, ph0, cw, d);
      fft::inverse(g, cw, s0[d]);
    }

    for (std::size_t i = 0; i < sz; ++i)
      q[i] = cd{std::imag(std::conj(vplus[i]) * dminus[i] + std::conj(vminus[i]) * dplus[i]), 0.0};
    fft::forward(g, q, cw);
    spectral::dealias(g, cw);
    A1.push(t, cw);
    for (std::size_t i = 0; i < sz; ++i) V1hat[i] = -A1.acc[i];

    // |v|^2_- = Re(conj(v_plus) v_minus)  (identity (|v2|^2-|v1|^2)/2)
    std::vector<cd> w2m(sz);
    for (std::size_t i = 0; i < sz; ++i)
      w2m[i] = cd{std::real(std::conj(vplus[i]) * vminus[i]) * 2.0, 0.0};

    for (int d = 0; d < g.rank; ++d) {
      for (std::size_t i = 0; i < sz; ++i) q[i] = cd{sfull[d][i].real() * w2m[i].real(), 0.0};
      fft::forward(g, q, cw);
      spectral::dealias(g, cw);
      A2[d].push(t, cw);
      for (std::size_t i = 0; i < sz; ++i)
        q[i] = cd{(sfull[d][i].real() - s0[d][i].real()) * w2m[i].real(), 0.0};
      fft::forward(g, q, cw);
      spectral::dealias(g, cw);
      A3[d].push(t, cw);
    }
    std::fill(V2hat.begin(), V2hat.end(), cd{0, 0});
    for (int d = 0; d < g.rank; ++d) spectral::add_divergence_term(g, A2[d].acc, V2hat, d);
    fft::inverse(g, V2hat, V2phys);
    for (int d = 0; d < g.rank; ++d) {
      for (std::size_t i = 0; i < sz; ++i) q[i] = cd{s0[d][i].real() * V2phys[i].real(), 0.0};
      fft::forward(g, q, cw);
      spectral::dealias(g, cw);
      A5[d].push(t, cw);
    }

    out.v1_norm[l] = spectral::weighted_norm(g, V1hat, 2.0 * sig - 2.0 - n2, true);
    out.v2_norm[l] = spectral::weighted_norm(g, V2hat, 2.0 * sig - 1.0 - n2, true);
    {
      std::vector<cd> V3hat(sz, cd{0, 0}), V5hat(sz, cd{0, 0});
      for (int d = 0; d < g.rank; ++d) {
        spectral::add_divergence_term(g, A3[d].acc, V3hat, d);
        spectral::add_divergence_term(g, A5[d].acc, V5hat, d);
      }
      out.v3_norm[l] = spectral::weighted_norm(g, V3hat, 2.0 * sig - 1.0 - n2, true);
      out.v5_norm[l] = spectral::weighted_norm(g, V5hat, 2.0 * sig - 2.0 - n2, true);
    }

    fft::forward(g, w2m, cw);
    spectral::dealias(g, cw);
    for (std::size_t i = 0; i < sz; ++i) cw[i] = cd{0.5, 0.0} * cw[i] - V1hat[i] - V2hat[i];
    out.residual_identity[l] = spectral::norm(g, cw);
  }
  return out;
}

// ---------------------------------------------------------------------------
// deterministic band-limited fields

namespace {
inline std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
inline double to_unit(std::uint64_t v) { return (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53; }
}  // namespace

SpectralField random_band_limited_field(const GridSpec& g, std::uint64_t seed, double k_band,
                                        double k_scale) {
  const auto& tab = mode_tables(g);
  std::vector<cd> c(g.size(), cd{0, 0});
  const int N = g.points;
  std::vector<int> idx(g.rank, 0);
  for (std::size_t f = 0; f < g.size(); ++f) {
    const double k2 = tab.ksq[f];
    if (k2 > 0.0 && k2 <= k_band * k_band && !tab.nyquist[f]) {
      std::uint64_t h = seed;
      for (int d = 0; d < g.rank; ++d) {
        std::uint64_t key = static_cast<std::uint64_t>(
            static_cast<std::int64_t>(g.signed_mode(idx[d])) + (1LL << 32));
        h ^= splitmix64(key);
      }
      const double u1 = to_unit(splitmix64(h));
      const double u2 = to_unit(splitmix64(h));
      const double rad = std::sqrt(-2.0 * std::log(u1));
      const double env = std::exp(-k2 / (2.0 * k_scale * k_scale));
      c[f] = env * rad *
             cd{std::cos(2.0 * std::numbers::pi * u2), std::sin(2.0 * std::numbers::pi * u2)};
    }
    for (int d = g.rank - 1; d >= 0; --d) {
      if (++idx[d] < N) break;
      idx[d] = 0;
    }
  }
  return to_physical(g, c);
}

// ---------------------------------------------------------------------------
// inequality spot checks

namespace {

struct SobolevInstance {
  double sigma, p_exp, q_exp, rho_ord, r_exp, theta;
  std::string describe() const {
    return "||w^" + std::to_string(sigma) + " u||_" + std::to_string(p_exp) + " <= C ||u||_" +
           std::to_string(q_exp) + "^(1-th) ||w^" + std::to_string(rho_ord) + " u||_" +
           std::to_string(r_exp) + "^th, th=" + std::to_string(theta);
  }
  void validate(int n) const {
    std::vector<std::string> bad;
    if (!(sigma >= 0.0 && sigma < rho_ord)) bad.push_back("need 0 <= sigma < rho");
    if (!(theta >= sigma / rho_ord && theta <= 1.0)) bad.push_back("need sigma/rho <= theta <= 1");
    if (std::isinf(p_exp) && !(rho_ord - sigma > n / r_exp))
      bad.push_back("p = infinity requires rho - sigma > n/r");
    const double lhs = (std::isinf(p_exp) ? 0.0 : n / p_exp) - sigma;
    const double rhs = (1.0 - theta) * n / q_exp + theta * (n / r_exp - rho_ord);
    if (std::abs(lhs - rhs) > 1e-12) bad.push_back("scaling relation violated");
    if (!bad.empty()) throw ValidationError(std::move(bad));
  }
};

double lr_of_omega(const SpectralField& u, double sigma, double r) {
  if (sigma == 0.0) return lr_norm(u, r);
  return lr_norm(apply_omega_power(u, sigma), r);
}

}  // namespace

SpotCheckResult inequality_spot_check(const std::string& lemma_id, int trials, std::uint64_t seed,
                                      const GridSpec& base, int doublings, const ModelParams& p) {
  SpotCheckResult res;
  res.lemma = lemma_id;
  res.trials = trials;
  const double inf = std::numeric_limits<double>::infinity();
  const double rp = std::min(p.rho, 0.95);
  const double k_band = base.freq_unit() * base.points / 6.0; // fixed physical band
  const double k_scale = 3.0;

  for (int lvl = 0; lvl <= doublings; ++lvl) {
    GridSpec g = GridSpec::make(base.rank, base.points << lvl, base.length);
    double worst = 0.0;
    for (int tr = 0; tr < trials; ++tr) {
      const std::uint64_t s1 = seed + 1000003ULL * tr;
      SpectralField u = random_band_limited_field(g, s1, k_band, k_scale);
      SpectralField v = random_band_limited_field(g, s1 ^ 0xabcdefULL, k_band, k_scale);

      double ratio = 0.0;
      if (lemma_id == "sobolev") {
        static const std::vector<SobolevInstance> insts = {
            {0.0, 4.0, 2.0, 1.0, 2.0, 0.5},
            {0.0, inf, 2.0, 1.5, 2.0, 2.0 / 3.0},
            {0.5, 4.0, 2.0, 1.5, 2.0, 2.0 / 3.0},
            {0.95, 2.0, 2.0, 0.95, 2.0, 1.0},
        };
        for (const auto& ins : insts) {
          ins.validate(g.rank);
          if (lvl == 0 && tr == 0) res.instances.push_back(ins.describe());
          const double lhs = lr_of_omega(u, ins.sigma, ins.p_exp);
          const double rhs = std::pow(lr_norm(u, ins.q_exp), 1.0 - ins.theta) *
                             std::pow(lr_of_omega(u, ins.rho_ord, ins.r_exp), ins.theta);
          if (rhs > 0.0) ratio = std::max(ratio, lhs / rhs);
        }
      } else if (lemma_id == "leibnitz") {
        for (double sig : {0.95, 1.6}) {
          if (lvl == 0 && tr == 0)
            res.instances.push_back("||w^" + std::to_string(sig) +
                                    "(uv)|| <= C(||w^s u||_4 ||v||_4 + ||w^s v||_4 ||u||_4)");
          SpectralField uv(g);
          for (std::size_t i = 0; i < g.size(); ++i)
            uv.values()[i] = u.values()[i] * v.values()[i];
          const double lhs = sobolev_norm(uv, NormSpec::riesz(sig));
          const double rhs = lr_of_omega(u, sig, 4.0) * lr_norm(v, 4.0) +
                             lr_of_omega(v, sig, 4.0) * lr_norm(u, 4.0);
          if (rhs > 0.0) ratio = std::max(ratio, lhs / rhs);
        }
      } else if (lemma_id == "bilinear") {
        for (auto [s1o, s2o] : std::vector<std::pair<double, double>>{{0.6, 0.6}, {0.3, 0.9}}) {
          const double s = s1o + s2o;
          if (!(s > 0.0) || std::max(s1o, s2o) >= 0.5 * g.rank)
            throw ValidationError({"bilinear instance violates sigma_1 v sigma_2 < n/2"});
          if (lvl == 0 && tr == 0)
            res.instances.push_back("||w^(s-n/2)(uv)|| <= C ||w^" + std::to_string(s1o) +
                                    " u|| ||w^" + std::to_string(s2o) + " v||");
          SpectralField uv(g);
          for (std::size_t i = 0; i < g.size(); ++i)
            uv.values()[i] = u.values()[i] * v.values()[i];
          const double lhs = sobolev_norm(uv, NormSpec::riesz(s - 0.5 * g.rank));
          const double rhs = sobolev_norm(u, NormSpec::riesz(s1o)) *
                             sobolev_norm(v, NormSpec::riesz(s2o));
          if (rhs > 0.0) ratio = std::max(ratio, lhs / rhs);
        }
      } else if (lemma_id == "commutator") {
        // the two restricted usages: transport-type [w^{2rp}, s].grad and
        // potential-type [w^{2rp}, f]; m is a gradient field like the real s.
        SpectralField psi_m = random_band_limited_field(g, s1 ^ 0x5eedULL, k_band, k_scale);
        for (auto& val : psi_m.values()) val = cd{val.real(), 0.0};
        VectorField m = gradient(psi_m);
        SpectralField f = psi_m;
        if (lvl == 0 && tr == 0) {
          res.instances.push_back("|<u, [w^(2r'), m].grad v>| vs (||w^(n/2) grad m|| + ||grad m||_inf) ||w^(r') u|| ||w^(r') v||");
          res.instances.push_back("|<u, [w^(2r'), f] u>| vs ||w^(n/2) f|| ||w^(r') u||^2");
        }
        const double lam = 2.0 * rp;
        auto omega_pow = [&](const SpectralField& x, double s) { return apply_omega_power(x, s); };
        // transport type
        {
          cd acc{0, 0};
          VectorField gv = gradient(v);
          for (int d = 0; d < g.rank; ++d) {
            // [w^lam, m_d] dv/dx_d
            SpectralField md_dv(g);
            for (std::size_t i = 0; i < g.size(); ++i)
              md_dv.values()[i] = m[d].values()[i].real() * gv[d].values()[i];
            SpectralField t1 = omega_pow(md_dv, lam);
            SpectralField wdv = omega_pow(gv[d], lam);
            for (std::size_t i = 0; i < g.size(); ++i)
              t1.values()[i] -= m[d].values()[i].real() * wdv.values()[i];
            for (std::size_t i = 0; i < g.size(); ++i)
              acc += std::conj(u.values()[i]) * t1.values()[i];
          }
          const double lhs = std::abs(acc) * g.cell_volume();
          double gradm_n = 0.0, gradm_inf = 0.0;
          for (int d = 0; d < g.rank; ++d) {
            VectorField gm = gradient(m[d]);
            for (int e = 0; e < g.rank; ++e) {
              const double nn = sobolev_norm(gm[e], NormSpec::riesz(0.5 * g.rank));
              gradm_n += nn * nn;
            }
            SpectralField mag(g);
            for (std::size_t i = 0; i < g.size(); ++i) {
              double a2 = 0.0;
              for (int e = 0; e < g.rank; ++e) a2 += std::norm(gm[e].values()[i]);
              mag.values()[i] = std::sqrt(a2);
            }
            gradm_inf = std::max(gradm_inf, lr_norm(mag, inf));
          }
          const double rhs = (std::sqrt(gradm_n) + gradm_inf) *
                             sobolev_norm(u, NormSpec::riesz(rp)) *
                             sobolev_norm(v, NormSpec::riesz(rp));
          if (rhs > 0.0) ratio = std::max(ratio, lhs / rhs);
        }
        // potential type
        {
          SpectralField fu(g);
          for (std::size_t i = 0; i < g.size(); ++i)
            fu.values()[i] = f.values()[i].real() * u.values()[i];
          SpectralField t1 = omega_pow(fu, lam);
          SpectralField wu = omega_pow(u, lam);
          for (std::size_t i = 0; i < g.size(); ++i)
            t1.values()[i] -= f.values()[i].real() * wu.values()[i];
          cd acc{0, 0};
          for (std::size_t i = 0; i < g.size(); ++i) acc += std::conj(u.values()[i]) * t1.values()[i];
          const double lhs = std::abs(acc) * g.cell_volume();
          const double rhs = sobolev_norm(f, NormSpec::riesz(0.5 * g.rank)) *
                             std::pow(sobolev_norm(u, NormSpec::riesz(rp)), 2.0);
          if (rhs > 0.0) ratio = std::max(ratio, lhs / rhs);
        }
      } else {
        throw DomainError("unknown lemma id: " + lemma_id);
      }
      worst = std::max(worst, ratio);
    }
    res.per_grid_max_ratio.push_back(worst);
  }
  res.max_ratio = res.per_grid_max_ratio.front();
  return res;
}

// ---------------------------------------------------------------------------

ExponentReport holder_continuity_check(const Trajectory& v_traj, const ModelParams& p,
                                       double rho_prime, double t_lo, double t_hi) {
  if (rho_prime == 0.0) rho_prime = p.rho;
  const auto& g = v_traj.grid;
  const auto& nodes = v_traj.mesh.nodes;
  std::vector<double> dt(nodes.size() - 1), dn(nodes.size() - 1);
  std::vector<cd> diff(g.size());
  const auto& first = v_traj.states_hat.front();
  for (std::size_t l = 1; l < nodes.size(); ++l) {
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = v_traj.states_hat[l][i] - first[i];
    dt[l - 1] = nodes[l] - nodes.front();
    dn[l - 1] = spectral::norm(g, diff);
  }
  const double predicted = std::min(rho_prime * p.gamma, 3.0 * p.gamma - 1.0);
  auto rep = verify_bound("holder_modulus", "||v(t) - v(t_1)||_L2", dt, dn, predicted,
                          1e9, 0.05, t_lo, t_hi, false);
  return rep;
}

}  // namespace hartree
