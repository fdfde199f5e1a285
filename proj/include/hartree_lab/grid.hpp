#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hartree_lab/types.hpp"

// Periodic grid on [-L/2, L/2)^n with a unitary DFT.
//
// Conventions used throughout:
//   * physical samples live at x_j = -L/2 + j*h, h = L/N, index row-major;
//   * coefficient arrays hold Fourier-series coefficients c_m with
//       u(x) = sum_m c_m exp(i k_m . x),   k_m = (2*pi/L) m,
//     m signed per dimension in [-N/2, N/2) (FFTW wraparound order);
//   * Parseval: h^n sum |u_j|^2 = L^n sum |c_m|^2 = ||u||_{L^2}^2;
//   * derivative multipliers (i k) zero the Nyquist plane, the plain
//     |k|^sigma multipliers do not. Identities such as div(grad u) = Delta u
//     therefore hold exactly on dealiased (2/3-band) fields.

namespace hartree {

struct GridSpec {
  int rank = 2;         // spatial dimension n >= 2
  int points = 128;     // per dimension, power of two >= 8
  double length = 20.0; // box side L > 0

  std::size_t size() const {
    std::size_t s = 1;
    for (int d = 0; d < rank; ++d) s *= static_cast<std::size_t>(points);
    return s;
  }
  double spacing() const { return length / points; }
  double cell_volume() const;
  double box_volume() const;
  double freq_unit() const; // 2*pi/L
  /// x-coordinate of index j along one dimension.
  double coord(int j) const { return -0.5 * length + j * spacing(); }
  /// signed mode integer for unsigned index m.
  int signed_mode(int m) const { return m < points / 2 ? m : m - points; }

  bool operator==(const GridSpec&) const = default;

  /// Validated constructor; throws ValidationError listing each violation.
  static GridSpec make(int rank, int points, double length);
};

/// Per-grid precomputed mode data, cached process-wide (thread-safe).
struct ModeTables {
  std::vector<double> kper;        // signed k value per unsigned index (length N)
  std::vector<double> ksq;         // |k|^2 per flattened mode
  std::vector<double> kcomp[3];    // k_d per flattened mode, d < rank
  std::vector<float> parity;       // (-1)^(sum of indices), as +-1
  std::vector<uint8_t> keep23;     // 2/3-rule mask (1 = keep)
  std::vector<uint8_t> nyquist;    // 1 on the Nyquist plane of any dimension
};
const ModeTables& mode_tables(const GridSpec& g);

namespace fft {
/// phys -> Fourier-series coefficients (in-place allowed, out may alias in).
void forward(const GridSpec& g, std::span<const cd> phys, std::span<cd> coef);
/// coefficients -> phys.
void inverse(const GridSpec& g, std::span<const cd> coef, std::span<cd> phys);
}  // namespace fft

/// Complex scalar field, physical-side storage.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(const GridSpec& g) : grid_(g), values_(g.size()) {}
  SpectralField(const GridSpec& g, std::vector<cd> vals);

  const GridSpec& grid() const { return grid_; }
  std::vector<cd>& values() { return values_; }
  const std::vector<cd>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  bool finite() const;
  void require_finite(const char* who) const;

 private:
  GridSpec grid_;
  std::vector<cd> values_;
};

/// n-tuple of scalar fields on one shared grid.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(const GridSpec& g);
  VectorField(std::vector<SpectralField> comps);

  const GridSpec& grid() const { return comps_.at(0).grid(); }
  int rank() const { return static_cast<int>(comps_.size()); }
  SpectralField& operator[](int d) { return comps_[d]; }
  const SpectralField& operator[](int d) const { return comps_[d]; }

 private:
  std::vector<SpectralField> comps_;
};

/// Norm request: ||<w>^sigma u|| or ||w^sigma u||, optionally the +-0
/// geometric-mean variant (homogeneous orders sigma +- eps).
struct NormSpec {
  double sigma = 0.0;
  bool homogeneous = false;
  bool pm_zero = false;
  double pm_epsilon = 0.05;

  static NormSpec sobolev(double sigma) { return {sigma, false, false, 0.05}; }
  static NormSpec riesz(double sigma) { return {sigma, true, false, 0.05}; }
  static NormSpec pm(double sigma, double eps = 0.05) { return {sigma, true, true, eps}; }
};

// ---- coefficient-space kernels (hot paths) ----
namespace spectral {
/// multiply by |k|^sigma; k=0 mode -> 0 for sigma != 0.
void omega_power(const GridSpec& g, std::span<cd> coef, double sigma);
/// multiply by chi(|k| sqrt(t)), the fixed smooth cutoff profile.
void chi_low(const GridSpec& g, std::span<cd> coef, double t);
/// multiply by exp(-i dt |k|^2 / 2) (free propagator step).
void kinetic_phase(const GridSpec& g, std::span<cd> coef, double dt);
/// zero all modes outside the 2/3 band.
void dealias(const GridSpec& g, std::span<cd> coef);
/// out_d = i k_d * coef (Nyquist plane zeroed).
void gradient_component(const GridSpec& g, std::span<const cd> coef, std::span<cd> out, int d);
/// accumulate i k_d * coef into out.
void add_divergence_term(const GridSpec& g, std::span<const cd> coef, std::span<cd> out, int d);
/// L^2 norm of w(k)*coef with w = |k|^sigma or (1+|k|^2)^{sigma/2}.
double weighted_norm(const GridSpec& g, std::span<const cd> coef, double sigma, bool homogeneous);
double norm(const GridSpec& g, std::span<const cd> coef); // plain L^2
}  // namespace spectral

/// The fixed cutoff profile: chi(l) = h(2-l)/(h(2-l)+h(l-1)), h(s)=exp(-1/s).
double chi_profile(double ell);

// ---- field-level operations ----
SpectralField to_physical(const GridSpec& g, std::span<const cd> coef);
std::vector<cd> to_fourier(const SpectralField& u);

SpectralField apply_omega_power(const SpectralField& u, double sigma);
double sobolev_norm(const SpectralField& u, const NormSpec& spec);
SpectralField cutoff_low(const SpectralField& u, double t);
SpectralField cutoff_high(const SpectralField& u, double t);
VectorField gradient(const SpectralField& u);
SpectralField divergence(const VectorField& s);
SpectralField laplacian(const SpectralField& u);

/// L^r(dx) norm by direct quadrature; r = infinity -> sup norm.
double lr_norm(const SpectralField& u, double r);

double l2_inner_real(const SpectralField& a, const SpectralField& b); // Re <a,b>

SpectralField operator+(const SpectralField& a, const SpectralField& b);
SpectralField operator-(const SpectralField& a, const SpectralField& b);
SpectralField operator*(cd scalar, const SpectralField& a);

}  // namespace hartree
