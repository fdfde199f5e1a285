#include "hartree_lab/oracles.hpp"

#include <cmath>
#include <numbers>

#include "hartree_lab/hartree.hpp"

namespace hartree::oracles {

namespace {
constexpr double kGL16x[16] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
    -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
    0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
constexpr double kGL16w[16] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
    0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

template <typename F>
double gl_composite(F f, double a, double b, int pieces) {
  const double h = (b - a) / pieces;
  double acc = 0.0;
  for (int s = 0; s < pieces; ++s) {
    const double lo = a + s * h;
    for (int q = 0; q < 16; ++q) {
      const double x = lo + 0.5 * h * (kGL16x[q] + 1.0);
      acc += 0.5 * h * kGL16w[q] * f(x);
    }
  }
  return acc;
}

double sphere_area(int n) {
  // |S^{n-1}|
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}
}  // namespace

double hartree_origin_gaussian(double gamma, int n, double kappa, double amplitude, double width) {
  // int |y|^{-gamma} A^2 exp(-|y|^2 / w^2) dy  (radial)
  const double A2 = amplitude * amplitude;
  const double w2 = width * width;
  auto f = [&](double r) { return std::pow(r, n - 1 - gamma) * std::exp(-r * r / w2); };
  const double upper = width * 14.0;
  return kappa * A2 * sphere_area(n) * gl_composite(f, 0.0, upper, 256);
}

double hartree_origin_gaussian_kside(double gamma, int n, double kappa, double amplitude,
                                     double width) {
  // |u|^2 = A^2 exp(-r^2/w^2); its transform: A^2 (pi w^2)^{n/2} exp(-w^2 k^2/4).
  // value at the origin of c(gamma,n) omega^{gamma-n} |u|^2:
  //   c (2 pi)^{-n} |S^{n-1}| int k^{gamma-1} what(k) dk
  const double A2 = amplitude * amplitude;
  const double w2 = width * width;
  const double c = riesz_multiplier_constant(gamma, n);
  auto f = [&](double k) {
    return std::pow(k, gamma - 1.0) * std::exp(-w2 * k * k / 4.0);
  };
  const double upper = 60.0 / width;
  const double integral = gl_composite(f, 0.0, upper, 512);
  return kappa * c * std::pow(2.0 * std::numbers::pi, -n) * sphere_area(n) * A2 *
         std::pow(std::numbers::pi * w2, 0.5 * n) * integral;
}

SpectralField free_gaussian_evolution(const GridSpec& g, double amplitude, double width, double t) {
  const cd denom = cd{width * width, t};
  const cd pref = std::pow(cd{width * width, 0.0} / denom, 0.5 * g.rank);
  SpectralField out(g);
  const int N = g.points;
  std::vector<int> idx(g.rank, 0);
  for (std::size_t f = 0; f < g.size(); ++f) {
    double r2 = 0.0;
    for (int d = 0; d < g.rank; ++d) {
      const double x = g.coord(idx[d]);
      r2 += x * x;
    }
    out.values()[f] = amplitude * pref * std::exp(-0.5 * r2 / denom);
    for (int d = g.rank - 1; d >= 0; --d) {
      if (++idx[d] < N) break;
      idx[d] = 0;
    }
  }
  return out;
}

double mode_sum_norm(const SpectralField& u, double sigma) {
  const GridSpec& g = u.grid();
  const int N = g.points;
  if (g.size() > 4096) throw DomainError("mode_sum_norm is O(N^2); use small grids");
  const auto& tab = mode_tables(g);
  // naive DFT: c_m = (1/N^n) sum_j u_j exp(-i k_m . x_j)
  double acc = 0.0;
  std::vector<int> m(g.rank, 0);
  for (std::size_t fm = 0; fm < g.size(); ++fm) {
    cd c{0.0, 0.0};
    std::vector<int> j(g.rank, 0);
    for (std::size_t fj = 0; fj < g.size(); ++fj) {
      double ph = 0.0;
      for (int d = 0; d < g.rank; ++d) ph += tab.kper[m[d]] * g.coord(j[d]);
      c += u.values()[fj] * cd{std::cos(ph), -std::sin(ph)};
      for (int d = g.rank - 1; d >= 0; --d) {
        if (++j[d] < N) break;
        j[d] = 0;
      }
    }
    c /= static_cast<double>(g.size());
    const double k2 = tab.ksq[fm];
    if (k2 > 0.0)
      acc += std::pow(k2, sigma) * std::norm(c);
    else if (sigma == 0.0)
      acc += std::norm(c);
    for (int d = g.rank - 1; d >= 0; --d) {
      if (++m[d] < N) break;
      m[d] = 0;
    }
  }
  return std::sqrt(g.box_volume() * acc);
}

}  // namespace hartree::oracles
