#pragma once

#include <atomic>
#include <memory>

#include "hartree_lab/hartree.hpp"

// Construction of the asymptotic pair (phi, v_a) and the phase-gradient
// fields: the driving integral
//     s_0(t) = -grad int_t^1 dt' t'^{gamma-2} g_L(v_0)(t')
// is diagonal in k, so it reduces to a single 1D profile
//     Phi(z) = int_1^z tau^{gamma-2} chi(sqrt(tau)) dtau
// via I_k(t) = |k|^{2(1-gamma)} (Phi(|k|^2) - Phi(|k|^2 t)). Phi and its
// antiderivative are tabulated once per gamma; s_0 and phi_0 are then exact
// at any time, including the step-averaged values the integrators use.
// The correction fields (s_b, s_c and their phases) are cumulative mesh
// integrals (composite trapezoid in log t) stored per node.

namespace hartree {

struct GradedMesh {
  double final_time = 1.0;
  int count = 512;
  double power = 6.0;
  std::vector<double> nodes; // t_k = T (k/K)^p, k = 1..K

  static GradedMesh make(double T, int K, double p);
  /// grading power ceil(1/lambda_1), capped at 6.
  static double auto_power(const ModelParams& p);
  /// largest index i with nodes[i] <= t (clamped).
  std::size_t index_at_or_below(double t) const;
};

/// Tabulated cutoff time-integral profile for one gamma.
class CutoffIntegralTable {
 public:
  explicit CutoffIntegralTable(double gamma);
  /// Phi(z) = int_1^z tau^{gamma-2} chi(sqrt(tau)) dtau.
  double phi(double z) const;
  /// int_1^z Phi(tau) dtau.
  double phi_anti(double z) const;
  /// I(k^2, t) = int_t^1 t'^{gamma-2} chi(|k| sqrt(t')) dt'.
  double integral(double ksq, double t) const;
  /// (1/(b-a)) int_a^b I(k^2, t) dt  (exact in the tabulated profile).
  double integral_avg(double ksq, double a, double b) const;
  double gamma() const { return gamma_; }

 private:
  double segment(double z0, double z1) const; // int of tau^{g-2} chi(sqrt(tau))
  double gamma_;
  int segs_;
  double lo_ = 1.0, hi_ = 4.0, h_;
  std::vector<double> prefix_;      // Phi at segment boundaries
  std::vector<double> prefix_anti_; // int_1^- Phi at segment boundaries
  double phi_total_;                // Phi(4) == Phi(inf)
};

struct AsymptoticProfile {
  int level = 1; // m
  GridSpec grid;
  ModelParams params;
  GradedMesh mesh;
  SpectralField v0;        // band-limited datum
  double a0 = 0.0;         // ||v0; H^rho||
  std::vector<cd> g0_hat;  // coefficients of g(v0), no cutoff
  std::shared_ptr<const CutoffIntegralTable> table;

  // per-node data (empty when level == 0 / kappa == 0 makes them zero)
  std::vector<std::vector<cd>> va_hat;   // transported amplitude
  std::vector<std::vector<cd>> phib_hat; // phase part driven by |s_0|^2
  std::vector<std::vector<cd>> phic_hat; // phase part driven by g_L(v_a)-g_L(v_0)

  double committed_t1_error = 0.0; // t_1^{lambda_1}, the initial-node defect scale
  std::shared_ptr<std::atomic<long>> interp_uses; // flagged off-node interpolations

  // ---- coefficient-space evaluation ----
  void phi0_hat(double t, std::span<cd> out) const;
  /// time average of phi0_hat over [a,b] (exact; used by the integrators).
  void phi0_hat_avg(double a, double b, std::span<cd> out) const;
  /// phi_b + phi_c at t (log-t interpolation between stored nodes).
  void phibc_hat(double t, std::span<cd> out) const;
  /// full phase phi = phi_0 + phi_b + phi_c.
  void phase_hat(double t, std::span<cd> out) const;
  void va_hat_at(double t, std::span<cd> out) const;
  /// |s_{m-1}|^2 coefficient source for the operator's phase-velocity term:
  /// level 1 -> |s_0|^2 (subtracted), level 0 -> zero field (nothing subtracted).
  bool has_phase_velocity_reference() const { return level >= 1; }

  // ---- field-level views ----
  VectorField s0_field(double t) const;
  VectorField s_total_field(double t) const;
  SpectralField phase_field(double t) const;
  SpectralField phi0_field(double t) const;
  SpectralField phib_field(double t) const;
  SpectralField phic_field(double t) const;
  SpectralField va_field(double t) const;
};

/// s_0 at time t (standalone evaluation from the datum).
VectorField compute_s0(const SpectralField& v0, double t, const ModelParams& p);

/// Transport solve for v_a over the mesh, v_a(t_1) = v0. Returns coefficient
/// arrays per node. Throws DivergenceError if the H^rho norm leaves the ball
/// 1e6 * a0.
std::vector<std::vector<cd>> solve_transport_va(const SpectralField& v0, const GradedMesh& mesh,
                                                const ModelParams& p);

/// s_b at a mesh node (from a built profile).
VectorField compute_sb(const AsymptoticProfile& prof, double t);
/// s_c at a mesh node, single-integral route.
VectorField compute_sc(const AsymptoticProfile& prof, double t);
/// s_c cross-check: the double-integral route with a cached inner cumulative.
VectorField compute_sc_double_integral(const AsymptoticProfile& prof, double t);

struct PhaseParts {
  SpectralField phi, phi0, phib, phic;
};
PhaseParts compute_phase(const AsymptoticProfile& prof, double t);

/// Build the level-m profile (m in {0, 1}).
AsymptoticProfile iterate_approximation(int m, const SpectralField& v0, const GradedMesh& mesh,
                                        const ModelParams& p);

}  // namespace hartree
