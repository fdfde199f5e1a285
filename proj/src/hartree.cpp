#include "hartree_lab/hartree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

namespace hartree {

namespace {
std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}
}  // namespace

double riesz_multiplier_constant(double gamma, int n) {
  // (2 pi)^{n/2} * 2^{n/2-gamma} * Gamma((n-gamma)/2) / Gamma(gamma/2)
  //   = 2^{n-gamma} pi^{n/2} Gamma((n-gamma)/2) / Gamma(gamma/2).
  return std::pow(2.0, n - gamma) * std::pow(std::numbers::pi, 0.5 * n) *
         std::tgamma(0.5 * (n - gamma)) / std::tgamma(0.5 * gamma);
}

ModelParams ModelParams::validated(double gamma, double rho, double kappa, int n,
                                   double plus_epsilon, bool relax_gamma) {
  std::vector<std::string> bad;
  if (n < 2) bad.push_back("dimension must satisfy n >= 2, got " + fmt(n));
  if (relax_gamma) {
    if (!(gamma > 0.0 && gamma < 1.0))
      bad.push_back("gamma must lie in (0, 1) even for the level-0 profile, got " + fmt(gamma));
  } else if (!(gamma > 1.0 / 3.0 && gamma < 0.5)) {
    bad.push_back("gamma must satisfy 1/3 < gamma < 1/2, got " + fmt(gamma));
  }
  const double rho_floor = 2.0 - 2.5 * gamma;
  const double rho_ceil = 0.5 * n;
  if (rho_floor >= rho_ceil)
    bad.push_back("admissible window empty: need 2 - 5*gamma/2 < rho < n/2 but 2 - 5*gamma/2 = " +
                  fmt(rho_floor) + " >= n/2 = " + fmt(rho_ceil));
  if (!(rho > rho_floor))
    bad.push_back("rho must exceed 2 - 5*gamma/2 = " + fmt(rho_floor) + ", got " + fmt(rho));
  if (!(rho < rho_ceil)) bad.push_back("rho must be below n/2 = " + fmt(rho_ceil) + ", got " + fmt(rho));
  if (!(plus_epsilon > 0.0)) bad.push_back("plus_epsilon must be positive");
  if (!std::isfinite(kappa)) bad.push_back("kappa must be finite");

  ModelParams p{gamma, rho, kappa, n, plus_epsilon, 0.0};
  if (bad.empty() && !relax_gamma && !(p.integrability_margin() > 0.0))
    bad.push_back("integrability margin 2*gamma + lambda_1 - 1 = " + fmt(p.integrability_margin()) +
                  " must be positive (equivalently rho > 2 - 5*gamma/2)");
  if (!bad.empty()) throw ValidationError(std::move(bad));
  p.riesz_constant = riesz_multiplier_constant(gamma, n);
  return p;
}

double ModelParams::bracket_plus(double a) const {
  if (a > 0.0) return a;
  if (a == 0.0) return plus_epsilon;
  return 0.0;
}

double ModelParams::lambda(double alpha) const {
  return gamma - 0.5 * bracket_plus(alpha + 1.0 + gamma - 2.0 * rho);
}

double ModelParams::mu(double j, double sigma_prime) const {
  return gamma - 0.5 * paren_plus(j + 1.0 + gamma - sigma_prime - 2.0 * rho);
}

double ModelParams::lambda_star(double sigma) const {
  return gamma - 0.5 * paren_plus(3.0 + gamma - 2.0 * sigma - 2.0 * rho);
}

double ModelParams::integrability_margin() const { return 2.0 * gamma + lambda(1.0) - 1.0; }

double exponent_lambda(double alpha, const ModelParams& p) { return p.lambda(alpha); }
double exponent_mu(double j, double sigma_prime, const ModelParams& p) { return p.mu(j, sigma_prime); }

// ---------------------------------------------------------------------------

void hartree_multiplier(const GridSpec& g, const ModelParams& p, std::span<const cd> w2hat,
                        std::span<cd> out, std::optional<double> cutoff_t) {
  if (p.gamma >= p.n) throw DomainError("invalid multiplier order: gamma must be below n");
  const auto& ksq = mode_tables(g).ksq;
  const double e = 0.5 * (p.gamma - p.n);
  const double amp = p.kappa * p.riesz_constant;
  const double rt = cutoff_t ? std::sqrt(*cutoff_t) : 0.0;
  if (cutoff_t && !(*cutoff_t > 0.0)) throw DomainError("cutoff requires t > 0");
  for (std::size_t i = 0; i < w2hat.size(); ++i) {
    if (ksq[i] <= 0.0) {
      out[i] = cd{0.0, 0.0};
      continue;
    }
    double m = amp * std::pow(ksq[i], e);
    if (cutoff_t) m *= chi_profile(std::sqrt(ksq[i]) * rt);
    out[i] = m * w2hat[i];
  }
}

namespace {
SpectralField modulus_squared(const SpectralField& u) {
  SpectralField w(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) w.values()[i] = cd{std::norm(u.values()[i]), 0.0};
  return w;
}

SpectralField realized(SpectralField f, const char* who) {
  double worst = 0.0, scale = 0.0;
  for (const cd& v : f.values()) {
    worst = std::max(worst, std::abs(v.imag()));
    scale = std::max(scale, std::abs(v.real()));
  }
  if (worst > 1e-10 * std::max(scale, 1e-30))
    throw FieldError(std::string(who) + ": unexpected imaginary residue");
  for (cd& v : f.values()) v = cd{v.real(), 0.0};
  return f;
}
}  // namespace

SpectralField hartree_potential(const SpectralField& u, const ModelParams& p) {
  u.require_finite("hartree_potential");
  const auto& g = u.grid();
  auto w2 = modulus_squared(u);
  std::vector<cd> c(g.size());
  fft::forward(g, w2.values(), c);
  spectral::dealias(g, c);
  std::vector<cd> out(g.size());
  hartree_multiplier(g, p, c, out, std::nullopt);
  return realized(to_physical(g, out), "hartree_potential");
}

std::pair<SpectralField, SpectralField> split_potential(const SpectralField& u, double t,
                                                        const ModelParams& p) {
  if (!(t > 0.0)) throw DomainError("split_potential requires t > 0");
  SpectralField g_full = hartree_potential(u, p);
  SpectralField g_low = cutoff_low(g_full, t);
  SpectralField g_high = g_full - g_low;
  return {std::move(g_low), std::move(g_high)};
}

// ---------------------------------------------------------------------------
// free-space evaluation: zero-pad |u|^2 onto a doubled box and convolve with
// the kernel |x|^{-gamma} truncated at R (slightly inside L/2 of the padded
// box so supports cannot wrap). Kernel transform khat(k) by radial quadrature:
//   n = 2 : khat(k) = 2 pi  int_0^R r^{1-gamma} J0(k r) dr
//   n = 3 : khat(k) = 4 pi  int_0^R r^{2-gamma} sinc(k r) dr
// Values cached per (grid, gamma).

namespace {

double kernel_hat_radial(double k, double R, double gamma, int n) {
  // composite Gauss-Legendre, subinterval length tied to the oscillation.
  static const double gx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                               -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                               0.7966664774136267,  0.9602898564975363};
  static const double gw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                               0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                               0.2223810344533745, 0.1012285362903763};
  const int pieces = std::max(32, static_cast<int>(std::ceil(k * R / 2.0)));
  const double hseg = R / pieces;
  double acc = 0.0;
  for (int s = 0; s < pieces; ++s) {
    const double a = s * hseg;
    for (int q = 0; q < 8; ++q) {
      const double r = a + 0.5 * hseg * (gx[q] + 1.0);
      double f;
      if (n == 2) {
        f = std::pow(r, 1.0 - gamma) * std::cyl_bessel_j(0.0, k * r);
      } else {
        const double kr = k * r;
        const double sinc = kr > 1e-12 ? std::sin(kr) / kr : 1.0;
        f = std::pow(r, 2.0 - gamma) * sinc;
      }
      acc += 0.5 * hseg * gw[q] * f;
    }
  }
  return (n == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi) * acc;
}

struct FreeKernelKey {
  int rank, points;
  double length, gamma;
  bool operator<(const FreeKernelKey& o) const {
    if (rank != o.rank) return rank < o.rank;
    if (points != o.points) return points < o.points;
    if (length != o.length) return length < o.length;
    return gamma < o.gamma;
  }
};
std::mutex kernel_mutex;
std::map<FreeKernelKey, std::shared_ptr<const std::vector<double>>> kernel_cache;

// kernel transform sampled on the padded grid's mode lattice
std::shared_ptr<const std::vector<double>> free_kernel(const GridSpec& padded, double gamma, double R) {
  FreeKernelKey key{padded.rank, padded.points, padded.length, gamma};
  {
    std::scoped_lock lock(kernel_mutex);
    auto it = kernel_cache.find(key);
    if (it != kernel_cache.end()) return it->second;
  }
  const auto& ksq = mode_tables(padded).ksq;
  // evaluate one quadrature per distinct |k|^2
  std::map<double, double> by_k2;
  for (double v : ksq) by_k2.emplace(v, 0.0);
  for (auto& [k2, val] : by_k2) val = kernel_hat_radial(std::sqrt(k2), R, gamma, padded.rank);
  auto tab = std::make_shared<std::vector<double>>(ksq.size());
  for (std::size_t i = 0; i < ksq.size(); ++i) (*tab)[i] = by_k2[ksq[i]];
  std::scoped_lock lock(kernel_mutex);
  kernel_cache.emplace(key, tab);
  return tab;
}

}  // namespace

SpectralField hartree_potential_freespace(const SpectralField& u, const ModelParams& p) {
  u.require_finite("hartree_potential_freespace");
  if (p.gamma >= p.n) throw DomainError("invalid multiplier order: gamma must be below n");
  const GridSpec& g = u.grid();
  const GridSpec gp{g.rank, 2 * g.points, 2.0 * g.length};
  const double R = 0.999 * g.length; // truncation radius of the kernel

  // embed |u|^2 centered in the padded box
  std::vector<cd> w2p(gp.size(), cd{0.0, 0.0});
  const int N = g.points, off = g.points / 2;
  const auto& uv = u.values();
  if (g.rank == 2) {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        w2p[static_cast<std::size_t>(i + off) * gp.points + (j + off)] =
            cd{std::norm(uv[static_cast<std::size_t>(i) * N + j]), 0.0};
  } else {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int l = 0; l < N; ++l)
          w2p[(static_cast<std::size_t>(i + off) * gp.points + (j + off)) * gp.points + (l + off)] =
              cd{std::norm(uv[(static_cast<std::size_t>(i) * N + j) * N + l]), 0.0};
  }

  std::vector<cd> chat(gp.size());
  fft::forward(gp, w2p, chat);
  auto khat = free_kernel(gp, p.gamma, R);
  // convolution theorem on the padded torus with series coefficients:
  // conv coefficients = khat(k) * c_m  (khat already carries the dx measure).
  for (std::size_t i = 0; i < chat.size(); ++i) chat[i] *= p.kappa * (*khat)[i];
  SpectralField convp = to_physical(gp, chat);

  SpectralField out(g);
  if (g.rank == 2) {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        out.values()[static_cast<std::size_t>(i) * N + j] =
            convp.values()[static_cast<std::size_t>(i + off) * gp.points + (j + off)];
  } else {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int l = 0; l < N; ++l)
          out.values()[(static_cast<std::size_t>(i) * N + j) * N + l] =
              convp.values()[(static_cast<std::size_t>(i + off) * gp.points + (j + off)) * gp.points +
                             (l + off)];
  }
  return realized(std::move(out), "hartree_potential_freespace");
}

}  // namespace hartree
