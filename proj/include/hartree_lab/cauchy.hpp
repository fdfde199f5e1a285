#pragma once

#include <functional>
#include <map>

#include "hartree_lab/asymptotics.hpp"

// Propagation of the linearized flow and the nonlinear fixed point on the
// graded mesh. One step [a, b] is a Strang composition
//     kinetic(dt/2) . phase(theta/2) . transport(dt) . phase(theta/2) . kinetic(dt/2)
// where the kinetic factor is the exact Fourier half-step, the phase factor
// is the exact unitary rotation by the time-integrated real potential (each
// potential piece integrated against its known power-law envelope), and the
// transport factor is a truncated Taylor exponential of the skew-adjoint
// generator s.grad + (1/2) div s frozen at the step's time-averaged field.
// Every factor is unitary up to roundoff, so the L^2 norm is conserved to
// machine precision and backward steps invert forward steps.

namespace hartree {

struct Trajectory {
  GridSpec grid;
  GradedMesh mesh;                          // node times (prefix of a profile mesh)
  std::vector<std::vector<cd>> states_hat;  // per node, dealiased coefficients

  static Trajectory constant_in_time(const GridSpec& g, const GradedMesh& mesh,
                                     const SpectralField& v0);

  void state_hat_at(double t, std::span<cd> out) const;
  SpectralField state_at(double t) const;

  /// per-node Sobolev norms, cached per (sigma, homogeneous) request.
  const std::vector<double>& norms(double sigma, bool homogeneous = false) const;
  double sup_norm(double sigma, bool homogeneous = false) const;

  mutable std::shared_ptr<std::atomic<long>> interp_uses =
      std::make_shared<std::atomic<long>>(0);

 private:
  mutable std::map<std::pair<long long, bool>, std::vector<double>> norm_cache_;
};

struct SolverConfig {
  double T = 0.0;               // 0 = solve the smallness relation (capped at 1)
  double fixed_point_tol = 1e-8;
  int max_iterations = 12;
  double rho_prime = 0.0;       // 0 = use rho
  double contraction_C = 0.0;   // 0 = calibrate on the run itself
  double calibration_safety = 4.0;
  double l2_drift_guard = 1e-5; // per-step relative drift triggering substeps
  int max_step_retries = 8;
  int taylor_order = 8;
};

/// The five non-Laplacian pieces of the operator at one time, for diagnostics.
struct LTerms {
  SpectralField transport;     // i s.grad v' + (i/2)(div s) v'
  SpectralField g_short;       // t^{gamma-2} g_S(v) v'
  SpectralField g_long_diff;   // t^{gamma-2} (g_L(v) - g_L(v_a)) v'
  SpectralField phase_velocity;// (1/2)(|s|^2 - |s_{m-1}|^2) v'
  SpectralField kinetic;       // -(1/2) Delta v'
};

/// L(v) v' at time t (point evaluation, full accuracy).
SpectralField apply_L(const SpectralField& v_state, const SpectralField& vprime_state,
                      const AsymptoticProfile& prof, double t, const ModelParams& p,
                      LTerms* terms = nullptr);

struct LinearizedDiagnostics {
  double l2_drift = 0.0;       // max relative |norm - norm0| over nodes
  long substeps = 0;
  long interp_uses = 0;
};

/// Solve i d_t v' = L(v) v' on the trajectory mesh with v'(t0) = vprime0.
/// t0 = 0 starts at the first node; otherwise t0 must be a mesh node. The
/// state is propagated across the whole mesh (both directions from t0).
Trajectory solve_linearized(const Trajectory& v_traj, const SpectralField& vprime0, double t0,
                            const SolverConfig& cfg, const AsymptoticProfile& prof,
                            const ModelParams& p, LinearizedDiagnostics* diag = nullptr);

/// E(t) = exp(C a^2 (1+a^2)(1+a_1^2)^2 t^{2 gamma + lambda_1 - 1}).
double gronwall_envelope(double t, double a, double a1, double C, const ModelParams& p);

/// a_1 = a exp(C a^2 T^{lambda_1}).
double transport_growth_bound(double a, double T, double C, const ModelParams& p);

/// Solve C R^2 (1+R^2)^3 T^{2 gamma + lambda_1 - 1} = 1 for T, capped.
double solve_smallness_time(double C, double R, const ModelParams& p, double cap = 1.0);

struct FixedPointResult {
  Trajectory v;
  bool converged = false;
  int iterations = 0;
  std::vector<double> distances;  // sup-in-time H^rho distance per iteration
  std::vector<double> ratios;     // contraction ratios
  double sup_hrho = 0.0;
  double T_used = 0.0;
  double contraction_C = 0.0;     // constant used in the smallness relation
  double kappa_emp = 0.0;         // measured contraction coefficient at T_ref
  std::string advice;             // non-empty iff not converged
  long interp_uses = 0;
};

/// Picard iteration v -> solve_linearized(v, v0, 0): starts from the
/// constant-in-time datum and runs until the sup-in-time H^rho increment
/// falls below tol.
FixedPointResult solve_nonlinear_fixed_point(const SpectralField& v0, SolverConfig cfg,
                                             const AsymptoticProfile& prof, const ModelParams& p);

struct LinearizedRun {
  Trajectory v_input;  // the frozen v driving the operator
  Trajectory vprime;   // the linearized solution
};

/// sup_t ||v'_-; H^rho'|| / (T^{2 gamma + lambda_1 - 1} sup_t ||v_-; H^rho||),
/// the empirical difference-estimate ratio. Returns 0 on identical inputs.
double difference_monitor(const LinearizedRun& run1, const LinearizedRun& run2,
                          const AsymptoticProfile& prof, const ModelParams& p,
                          double rho_prime = 0.0);

}  // namespace hartree
