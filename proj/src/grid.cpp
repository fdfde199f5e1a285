#include "hartree_lab/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace hartree {

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int d = 0; d < rank; ++d) v *= spacing();
  return v;
}

double GridSpec::box_volume() const {
  double v = 1.0;
  for (int d = 0; d < rank; ++d) v *= length;
  return v;
}

double GridSpec::freq_unit() const { return 2.0 * std::numbers::pi / length; }

GridSpec GridSpec::make(int rank, int points, double length) {
  std::vector<std::string> bad;
  if (rank < 2) bad.push_back("grid rank must satisfy n >= 2, got " + std::to_string(rank));
  if (rank > 3) bad.push_back("grid rank > 3 not supported at desk scale");
  if (points < 8) bad.push_back("points_per_dim must be >= 8, got " + std::to_string(points));
  if (points & (points - 1)) bad.push_back("points_per_dim must be a power of two, got " + std::to_string(points));
  if (!(length > 0.0)) bad.push_back("box length must be positive");
  if (!bad.empty()) throw ValidationError(std::move(bad));
  return GridSpec{rank, points, length};
}

// ---------------------------------------------------------------------------
// cached mode tables

namespace {
struct GridKey {
  int rank, points;
  double length;
  bool operator<(const GridKey& o) const {
    if (rank != o.rank) return rank < o.rank;
    if (points != o.points) return points < o.points;
    return length < o.length;
  }
};
std::mutex table_mutex;
std::map<GridKey, std::unique_ptr<ModeTables>> table_cache;
}  // namespace

const ModeTables& mode_tables(const GridSpec& g) {
  GridKey key{g.rank, g.points, g.length};
  std::scoped_lock lock(table_mutex);
  auto it = table_cache.find(key);
  if (it != table_cache.end()) return *it->second;

  auto t = std::make_unique<ModeTables>();
  const int N = g.points;
  const double ku = g.freq_unit();
  t->kper.resize(N);
  for (int m = 0; m < N; ++m) t->kper[m] = ku * g.signed_mode(m);

  const std::size_t total = g.size();
  t->ksq.assign(total, 0.0);
  for (int d = 0; d < g.rank; ++d) t->kcomp[d].assign(total, 0.0);
  t->parity.assign(total, 1.0f);
  t->keep23.assign(total, 1);
  t->nyquist.assign(total, 0);

  const int band = N / 3; // keep |m| <= floor(N/3)
  std::vector<int> idx(g.rank, 0);
  for (std::size_t f = 0; f < total; ++f) {
    double k2 = 0.0;
    int isum = 0;
    bool keep = true, nyq = false;
    for (int d = 0; d < g.rank; ++d) {
      const int m = idx[d];
      const double kd = t->kper[m];
      k2 += kd * kd;
      t->kcomp[d][f] = kd;
      isum += m;
      const int sm = g.signed_mode(m);
      if (std::abs(sm) > band) keep = false;
      if (sm == -N / 2) nyq = true;
    }
    t->ksq[f] = k2;
    t->parity[f] = (isum & 1) ? -1.0f : 1.0f;
    t->keep23[f] = keep ? 1 : 0;
    t->nyquist[f] = nyq ? 1 : 0;
    for (int d = g.rank - 1; d >= 0; --d) {
      if (++idx[d] < N) break;
      idx[d] = 0;
    }
  }
  auto& ref = *t;
  table_cache.emplace(key, std::move(t));
  return ref;
}

// ---------------------------------------------------------------------------
// FFT engine: cached FFTW plans, FFTW_ESTIMATE for run-to-run determinism.
// Plan creation is not thread-safe; guard it. Execution via the new-array
// interface is safe for concurrent use on distinct buffers.

namespace fft {
namespace {
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  ~PlanPair() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};
std::mutex plan_mutex;
std::map<std::pair<int, int>, std::unique_ptr<PlanPair>> plan_cache;

PlanPair& plans_for(const GridSpec& g) {
  std::scoped_lock lock(plan_mutex);
  auto key = std::make_pair(g.rank, g.points);
  auto it = plan_cache.find(key);
  if (it != plan_cache.end()) return *it->second;
  auto pp = std::make_unique<PlanPair>();
  std::vector<int> dims(g.rank, g.points);
  std::vector<cd> a(g.size()), b(g.size());
  pp->fwd = fftw_plan_dft(g.rank, dims.data(), reinterpret_cast<fftw_complex*>(a.data()),
                          reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD,
                          FFTW_ESTIMATE | FFTW_UNALIGNED);
  pp->bwd = fftw_plan_dft(g.rank, dims.data(), reinterpret_cast<fftw_complex*>(a.data()),
                          reinterpret_cast<fftw_complex*>(b.data()), FFTW_BACKWARD,
                          FFTW_ESTIMATE | FFTW_UNALIGNED);
  auto& ref = *pp;
  plan_cache.emplace(key, std::move(pp));
  return ref;
}
}  // namespace

void forward(const GridSpec& g, std::span<const cd> phys, std::span<cd> coef) {
  const auto& tab = mode_tables(g);
  const auto& pp = plans_for(g);
  const std::size_t n = g.size();
  const double inv = 1.0 / static_cast<double>(n);
  // out-of-place execute requires distinct buffers; copy if aliased
  if (coef.data() == phys.data()) {
    std::vector<cd> tmp(phys.begin(), phys.end());
    fftw_execute_dft(pp.fwd, reinterpret_cast<fftw_complex*>(tmp.data()),
                     reinterpret_cast<fftw_complex*>(coef.data()));
  } else {
    fftw_execute_dft(pp.fwd, reinterpret_cast<fftw_complex*>(const_cast<cd*>(phys.data())),
                     reinterpret_cast<fftw_complex*>(coef.data()));
  }
  for (std::size_t i = 0; i < n; ++i) coef[i] *= tab.parity[i] * inv;
}

void inverse(const GridSpec& g, std::span<const cd> coef, std::span<cd> phys) {
  const auto& tab = mode_tables(g);
  const auto& pp = plans_for(g);
  const std::size_t n = g.size();
  if (phys.data() != coef.data()) std::copy(coef.begin(), coef.end(), phys.begin());
  for (std::size_t i = 0; i < n; ++i) phys[i] *= tab.parity[i];
  fftw_execute_dft(pp.bwd, reinterpret_cast<fftw_complex*>(phys.data()),
                   reinterpret_cast<fftw_complex*>(phys.data()));
}
}  // namespace fft

// ---------------------------------------------------------------------------

SpectralField::SpectralField(const GridSpec& g, std::vector<cd> vals) : grid_(g), values_(std::move(vals)) {
  if (values_.size() != g.size()) throw ShapeError("field size does not match grid");
}

bool SpectralField::finite() const {
  for (const cd& v : values_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

void SpectralField::require_finite(const char* who) const {
  if (!finite()) throw FieldError(std::string(who) + ": non-finite field values");
}

VectorField::VectorField(const GridSpec& g) {
  comps_.reserve(g.rank);
  for (int d = 0; d < g.rank; ++d) comps_.emplace_back(g);
}

VectorField::VectorField(std::vector<SpectralField> comps) : comps_(std::move(comps)) {
  if (comps_.empty()) throw ShapeError("vector field needs components");
  for (const auto& c : comps_)
    if (!(c.grid() == comps_[0].grid())) throw ShapeError("vector field components on mismatched grids");
  if (static_cast<int>(comps_.size()) != comps_[0].grid().rank)
    throw ShapeError("vector field must have one component per dimension");
}

// ---------------------------------------------------------------------------

double chi_profile(double ell) {
  auto h = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  if (ell <= 1.0) return 1.0;
  if (ell >= 2.0) return 0.0;
  const double a = h(2.0 - ell), b = h(ell - 1.0);
  return a / (a + b);
}

namespace spectral {

void omega_power(const GridSpec& g, std::span<cd> coef, double sigma) {
  if (sigma == 0.0) return;
  const auto& ksq = mode_tables(g).ksq;
  const double e = 0.5 * sigma;
  for (std::size_t i = 0; i < coef.size(); ++i)
    coef[i] = ksq[i] > 0.0 ? coef[i] * std::pow(ksq[i], e) : cd{0.0, 0.0};
}

void chi_low(const GridSpec& g, std::span<cd> coef, double t) {
  if (t <= 0.0) throw DomainError("cutoff requires t > 0");
  const auto& ksq = mode_tables(g).ksq;
  const double rt = std::sqrt(t);
  for (std::size_t i = 0; i < coef.size(); ++i) coef[i] *= chi_profile(std::sqrt(ksq[i]) * rt);
}

void kinetic_phase(const GridSpec& g, std::span<cd> coef, double dt) {
  const auto& ksq = mode_tables(g).ksq;
  for (std::size_t i = 0; i < coef.size(); ++i) {
    const double ph = -0.5 * dt * ksq[i];
    coef[i] *= cd{std::cos(ph), std::sin(ph)};
  }
}

void dealias(const GridSpec& g, std::span<cd> coef) {
  const auto& keep = mode_tables(g).keep23;
  for (std::size_t i = 0; i < coef.size(); ++i)
    if (!keep[i]) coef[i] = cd{0.0, 0.0};
}

void gradient_component(const GridSpec& g, std::span<const cd> coef, std::span<cd> out, int d) {
  const auto& tab = mode_tables(g);
  for (std::size_t i = 0; i < coef.size(); ++i) {
    if (tab.nyquist[i]) {
      out[i] = cd{0.0, 0.0};
      continue;
    }
    out[i] = cd{0.0, tab.kcomp[d][i]} * coef[i];
  }
}

void add_divergence_term(const GridSpec& g, std::span<const cd> coef, std::span<cd> out, int d) {
  const auto& tab = mode_tables(g);
  for (std::size_t i = 0; i < coef.size(); ++i) {
    if (tab.nyquist[i]) continue;
    out[i] += cd{0.0, tab.kcomp[d][i]} * coef[i];
  }
}

double weighted_norm(const GridSpec& g, std::span<const cd> coef, double sigma, bool homogeneous) {
  // returns || omega^sigma u || (homogeneous) or || <omega>^sigma u ||;
  // |k|^{2 sigma} = ksq^sigma on the squared coefficients.
  const auto& ksq = mode_tables(g).ksq;
  double acc = 0.0;
  if (homogeneous) {
    for (std::size_t i = 0; i < coef.size(); ++i) {
      if (ksq[i] <= 0.0) {
        if (sigma == 0.0) acc += std::norm(coef[i]);
        continue;
      }
      acc += std::pow(ksq[i], sigma) * std::norm(coef[i]);
    }
  } else {
    for (std::size_t i = 0; i < coef.size(); ++i) acc += std::pow(1.0 + ksq[i], sigma) * std::norm(coef[i]);
  }
  return std::sqrt(g.box_volume() * acc);
}

double norm(const GridSpec& g, std::span<const cd> coef) {
  double acc = 0.0;
  for (const cd& c : coef) acc += std::norm(c);
  return std::sqrt(g.box_volume() * acc);
}

}  // namespace spectral

// ---------------------------------------------------------------------------

SpectralField to_physical(const GridSpec& g, std::span<const cd> coef) {
  SpectralField out(g);
  fft::inverse(g, coef, out.values());
  return out;
}

std::vector<cd> to_fourier(const SpectralField& u) {
  std::vector<cd> c(u.size());
  fft::forward(u.grid(), u.values(), c);
  return c;
}

SpectralField apply_omega_power(const SpectralField& u, double sigma) {
  u.require_finite("apply_omega_power");
  auto c = to_fourier(u);
  spectral::omega_power(u.grid(), c, sigma);
  return to_physical(u.grid(), c);
}

double sobolev_norm(const SpectralField& u, const NormSpec& spec) {
  u.require_finite("sobolev_norm");
  if (spec.pm_zero && !(spec.pm_epsilon > 0.0)) throw DomainError("pm_epsilon must be positive");
  auto c = to_fourier(u);
  if (spec.pm_zero) {
    const double np = spectral::weighted_norm(u.grid(), c, spec.sigma + spec.pm_epsilon, true);
    const double nm = spectral::weighted_norm(u.grid(), c, spec.sigma - spec.pm_epsilon, true);
    return std::sqrt(np * nm);
  }
  return spectral::weighted_norm(u.grid(), c, spec.sigma, spec.homogeneous);
}

SpectralField cutoff_low(const SpectralField& u, double t) {
  u.require_finite("cutoff_low");
  auto c = to_fourier(u);
  spectral::chi_low(u.grid(), c, t);
  return to_physical(u.grid(), c);
}

SpectralField cutoff_high(const SpectralField& u, double t) {
  SpectralField lo = cutoff_low(u, t);
  SpectralField out(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) out.values()[i] = u.values()[i] - lo.values()[i];
  return out;
}

VectorField gradient(const SpectralField& u) {
  u.require_finite("gradient");
  const auto& g = u.grid();
  auto c = to_fourier(u);
  std::vector<SpectralField> comps;
  comps.reserve(g.rank);
  std::vector<cd> work(c.size());
  for (int d = 0; d < g.rank; ++d) {
    spectral::gradient_component(g, c, work, d);
    comps.push_back(to_physical(g, work));
  }
  return VectorField(std::move(comps));
}

SpectralField divergence(const VectorField& s) {
  const auto& g = s.grid();
  std::vector<cd> acc(g.size(), cd{0.0, 0.0});
  std::vector<cd> c(g.size());
  for (int d = 0; d < s.rank(); ++d) {
    s[d].require_finite("divergence");
    fft::forward(g, s[d].values(), c);
    spectral::add_divergence_term(g, c, acc, d);
  }
  return to_physical(g, acc);
}

SpectralField laplacian(const SpectralField& u) {
  u.require_finite("laplacian");
  const auto& g = u.grid();
  const auto& ksq = mode_tables(g).ksq;
  auto c = to_fourier(u);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= -ksq[i];
  return to_physical(g, c);
}

double lr_norm(const SpectralField& u, double r) {
  u.require_finite("lr_norm");
  if (std::isinf(r)) {
    double m = 0.0;
    for (const cd& v : u.values()) m = std::max(m, std::abs(v));
    return m;
  }
  if (!(r >= 1.0)) throw DomainError("L^r norm needs r >= 1");
  double acc = 0.0;
  for (const cd& v : u.values()) acc += std::pow(std::abs(v), r);
  return std::pow(u.grid().cell_volume() * acc, 1.0 / r);
}

double l2_inner_real(const SpectralField& a, const SpectralField& b) {
  if (!(a.grid() == b.grid())) throw ShapeError("inner product on mismatched grids");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += a.values()[i].real() * b.values()[i].real() + a.values()[i].imag() * b.values()[i].imag();
  return a.grid().cell_volume() * acc;
}

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
  if (!(a.grid() == b.grid())) throw ShapeError("field addition on mismatched grids");
  SpectralField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out.values()[i] = a.values()[i] + b.values()[i];
  return out;
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
  if (!(a.grid() == b.grid())) throw ShapeError("field subtraction on mismatched grids");
  SpectralField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out.values()[i] = a.values()[i] - b.values()[i];
  return out;
}

SpectralField operator*(cd scalar, const SpectralField& a) {
  SpectralField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out.values()[i] = scalar * a.values()[i];
  return out;
}

}  // namespace hartree
