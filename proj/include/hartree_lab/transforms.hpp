#pragma once

#include "hartree_lab/estimates.hpp"

// The kinematic layer: the free propagator, its chirp-dilation-transform
// factorization, the conjugate-Fourier inversion that swaps neighborhoods of
// t = 0 and t = infinity, phase dressing, and the growth check on the dressed
// amplitude.
//
// The conjugate-Fourier map sends a field on grid (N, L) to the dual grid
// (N, 2 pi N / L): the mode lattice of one grid is the point lattice of the
// other, which makes the map exactly unitary and exactly involutive. Grids
// with L = sqrt(2 pi N) are self-dual.

namespace hartree {

/// exp(i (t/2) Laplacian): multiplier exp(-i t |k|^2 / 2); any sign of t.
SpectralField free_propagate(const SpectralField& u, double t);

GridSpec dual_grid(const GridSpec& g);
bool is_self_dual(const GridSpec& g, double tol = 1e-9);

/// w(x_m) -> conj( (2 pi)^{-n/2} int w e^{-i k x} ) sampled on the dual grid.
SpectralField pseudoconformal_invert(const SpectralField& w);

/// H^rho norm of the conjugate-Fourier image, i.e. the FH^rho norm of w.
double fourier_side_norm(const SpectralField& w, const NormSpec& spec);

/// Admissible dilation window for the resampling realization of f(x/t).
constexpr double kDilationMin = 0.5;
constexpr double kDilationMax = 2.0;

/// D_0(t) f = f(x/t), realized by evaluating the Fourier series at x/t
/// (separable scaled transform). Refuses t outside the admissible window.
SpectralField dilate(const SpectralField& u, double t);

/// M(t) = exp(i |x|^2 / (2t)); requires t >= chirp_time_floor(grid) so the
/// phase advances by less than pi per cell over the box.
SpectralField chirp_multiply(const SpectralField& u, double t);
double chirp_time_floor(const GridSpec& g);

/// The factorized propagator M(t) D(t) F M(t) on a self-dual grid; exposed
/// for the factorization consistency check (t within the dilation window and
/// above the chirp floor).
SpectralField free_propagate_factored(const SpectralField& u, double t);

struct DressedState {
  double t = 0.0;
  SpectralField v;
  SpectralField phi;
  SpectralField u_c; // exp(-i phi) v
};

DressedState dress_state(const SpectralField& v, const SpectralField& phi, double t);
std::vector<DressedState> assemble_uc(const Trajectory& v_traj, const AsymptoticProfile& prof);

/// u(t) = exp(i D_0(t) phi(1/t)) M(t) D(t) conj(v(1/t)): the solution near
/// t = infinity reconstructed from the dressed state at 1/t. Restricted to
/// the dilation window.
SpectralField reconstruct_u(const DressedState& dressed, double t);

struct GrowthCheckResult {
  std::vector<double> times;
  std::vector<double> uc_hrho;      // || u_c(t); H^rho ||
  std::vector<double> envelope;     // calibrated bound curve
  double calibrated_C = 0.0;        // smallest C making the bound hold on this run
  double fitted_small_t_slope = 0.0;
  double predicted_small_t_slope = 0.0; // (gamma - 1)(1 + [rho])
  bool envelope_holds = false;
};

/// Measured || u_c(t); H^rho || against C a0 (1 + a0^2 (1 + a0^2 t^gamma) t^{gamma-1})^{1+[rho]}.
/// If calibrated_C_in > 0 the given constant is tested, otherwise the run
/// calibrates the smallest admissible C.
GrowthCheckResult fh_growth_check(const std::vector<DressedState>& dressed, double a0,
                                  const ModelParams& p, double calibrated_C_in = 0.0,
                                  double fit_lo = 1e-3, double fit_hi = 1e-1);

}  // namespace hartree
