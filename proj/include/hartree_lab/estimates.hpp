#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "hartree_lab/cauchy.hpp"

// The verification harness: remainder decomposition of |v|^2 - |v_a|^2,
// log-log slope fits, normalized-envelope verdicts, random spot checks of the
// inequality toolbox, and the small-time modulus fit.

namespace hartree {

struct FitResult {
  double slope = 0.0;
  double ci95 = 0.0;      // half-width from residual variance
  double intercept = 0.0; // in log coordinates
  int npoints = 0;
};

/// Ordinary least squares on (log t, log value) restricted to [t_lo, t_hi].
/// Requires >= 8 positive samples in the window.
FitResult fit_decay_exponent(std::span<const double> t, std::span<const double> value,
                             double t_lo, double t_hi);

struct ExponentReport {
  std::string quantity;
  std::string norm_desc;
  double predicted = 0.0;
  FitResult fit;
  double band_ratio = 0.0; // max/min of t^{-predicted} * value over the window
  double band_limit = 10.0;
  double slope_tol = 0.05;
  bool band_only = false; // skip the slope criterion (pairing-type bounds)
  double window_lo = 1e-3, window_hi = 1e-1;

  bool pass() const {
    const bool band_ok = band_ratio <= band_limit;
    const bool slope_ok = band_only || fit.slope >= predicted - slope_tol;
    return band_ok && slope_ok;
  }
  std::string verdict() const { return pass() ? "pass" : "fail"; }
};

ExponentReport verify_bound(std::string quantity, std::string norm_desc,
                            std::span<const double> t, std::span<const double> value,
                            double predicted, double band_limit = 10.0, double slope_tol = 0.05,
                            double t_lo = 1e-3, double t_hi = 1e-1, bool band_only = false);

// ---------------------------------------------------------------------------

struct DecompositionOptions {
  double sigma = 0.0;        // norm order parameter; 0 = use rho
  double sigma_prime = 0.0;  // smoothed-cutoff series order; 0 = use rho
  std::array<double, 3> psi_widths{0.7, 1.4, 2.8}; // the fixed bump family
};

/// Time series of the remainder decomposition. All "norm" series carry the
/// weighted homogeneous norms at the orders the corresponding estimates use;
/// defect series are plain L^2 norms.
struct VDecomposition {
  std::vector<double> times;
  std::vector<double> v1_norm;   // omega^{2s-2-n/2} V1
  std::vector<double> v2_norm;   // omega^{2s-1-n/2} V2
  std::vector<double> v3_norm;   // omega^{2s-1-n/2} V3
  std::vector<double> v5_norm;   // omega^{2s-2-n/2} V5
  std::vector<std::array<double, 3>> v4_pairing; // |<psi_w, V4>| / ||omega^{3-2s+n/2} psi_w||
  std::vector<double> residual_identity;   // || (|v|^2-|v_a|^2) - V1 - V2 ||_{L^2}
  std::vector<double> subdecomp_defect;    // || V2 - (V3+V4+V5) ||_{L^2}
  // t^{gamma-2} || omega^{gamma-s'-n/2} chi_L V_j || series
  std::vector<double> cut_v1, cut_v3, cut_v4, cut_v5;
  double sup_identity_residual = 0.0;
  double sup_subdecomp_defect = 0.0;
};

VDecomposition compute_v_decomposition(const Trajectory& v_traj, const AsymptoticProfile& prof,
                                       const ModelParams& p, const DecompositionOptions& opt = {});

/// Difference-mode series for a trajectory pair (same mesh, same datum):
/// the norms of V_{1-}, V_{2-} ... and the defect of the pair identity.
struct VDecompositionDiff {
  std::vector<double> times;
  std::vector<double> v1_norm, v2_norm, v3_norm, v5_norm;
  std::vector<double> residual_identity; // || |v|^2_- - V1- - V2- ||_{L^2}
};

VDecompositionDiff compute_v_decomposition_diff(const Trajectory& v1, const Trajectory& v2,
                                                const AsymptoticProfile& prof, const ModelParams& p,
                                                const DecompositionOptions& opt = {});

// ---------------------------------------------------------------------------

struct SpotCheckResult {
  std::string lemma;
  int trials = 0;
  double max_ratio = 0.0;                  // on the base grid
  std::vector<double> per_grid_max_ratio;  // base, then each doubling
  std::vector<std::string> instances;      // instance descriptions
  bool ratio_stable(double factor = 2.0) const {
    for (std::size_t i = 1; i < per_grid_max_ratio.size(); ++i) {
      const double r = per_grid_max_ratio[i] / per_grid_max_ratio[i - 1];
      if (r > factor || r < 1.0 / factor) return false;
    }
    return true;
  }
};

/// lemma_id in {"sobolev", "leibnitz", "bilinear", "commutator"}; samples
/// deterministic band-limited fields (grid-extension consistent, so the same
/// continuum field appears on every refinement level) and reports the largest
/// observed LHS/RHS ratio per grid.
SpotCheckResult inequality_spot_check(const std::string& lemma_id, int trials, std::uint64_t seed,
                                      const GridSpec& base, int doublings, const ModelParams& p);

/// Fits the small-time modulus || v(t) - v(t_1) || ~ |t - t_1|^mu.
ExponentReport holder_continuity_check(const Trajectory& v_traj, const ModelParams& p,
                                       double rho_prime = 0.0, double t_lo = 1e-3, double t_hi = 1e-1);

/// Deterministic mode-indexed Gaussian field: a fixed continuum random field
/// independent of the grid resolution (band |k| <= k_band, envelope scale k_scale).
SpectralField random_band_limited_field(const GridSpec& g, std::uint64_t seed, double k_band,
                                        double k_scale);

}  // namespace hartree
