#include "hartree_lab/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hartree {

SpectralField free_propagate(const SpectralField& u, double t) {
  u.require_finite("free_propagate");
  auto c = to_fourier(u);
  spectral::kinetic_phase(u.grid(), c, t);
  return to_physical(u.grid(), c);
}

GridSpec dual_grid(const GridSpec& g) {
  return GridSpec{g.rank, g.points, 2.0 * std::numbers::pi * g.points / g.length};
}

bool is_self_dual(const GridSpec& g, double tol) {
  return std::abs(g.length - dual_grid(g).length) <= tol * g.length;
}

namespace {

// plain conjugate-free Fourier map onto the dual grid:
// out(x'_m) = (2 pi)^{-n/2} L^n c_m, with the mode lattice reindexed to the
// dual point lattice (fftshift).
SpectralField fourier_map(const SpectralField& w) {
  const GridSpec& g = w.grid();
  const GridSpec gd = dual_grid(g);
  auto c = to_fourier(w);
  const double scale =
      std::pow(2.0 * std::numbers::pi, -0.5 * g.rank) * std::pow(g.length, g.rank);
  SpectralField out(gd);
  const int N = g.points;
  std::vector<int> idx(g.rank, 0);
  for (std::size_t f = 0; f < c.size(); ++f) {
    std::size_t target = 0;
    for (int d = 0; d < g.rank; ++d) target = target * N + ((idx[d] + N / 2) % N);
    out.values()[target] = scale * c[f];
    for (int d = g.rank - 1; d >= 0; --d) {
      if (++idx[d] < N) break;
      idx[d] = 0;
    }
  }
  return out;
}

}  // namespace

SpectralField pseudoconformal_invert(const SpectralField& w) {
  w.require_finite("pseudoconformal_invert");
  SpectralField out = fourier_map(w);
  for (auto& v : out.values()) v = std::conj(v);
  return out;
}

double fourier_side_norm(const SpectralField& w, const NormSpec& spec) {
  return sobolev_norm(pseudoconformal_invert(w), spec);
}

// ---------------------------------------------------------------------------

SpectralField dilate(const SpectralField& u, double t) {
  u.require_finite("dilate");
  if (!(t >= kDilationMin && t <= kDilationMax))
    throw DomainError("dilation factor " + std::to_string(t) +
                      " outside the admissible window [0.5, 2]");
  const GridSpec& g = u.grid();
  const int N = g.points;
  const auto& kper = mode_tables(g).kper;
  auto c = to_fourier(u);

  // per-dimension evaluation matrix E[j, m] = exp(i k_m x_j / t)
  std::vector<cd> E(static_cast<std::size_t>(N) * N);
  for (int j = 0; j < N; ++j) {
    const double x = g.coord(j) / t;
    for (int m = 0; m < N; ++m) {
      const double ph = kper[m] * x;
      E[static_cast<std::size_t>(j) * N + m] = cd{std::cos(ph), std::sin(ph)};
    }
  }

  // transform one axis at a time (coefficients -> samples along that axis)
  std::vector<cd> cur = std::move(c), next(cur.size());
  std::size_t stride_after = 1; // product of extents of axes after d
  for (int d = g.rank - 1; d >= 0; --d) {
    const std::size_t blocks = cur.size() / (static_cast<std::size_t>(N) * stride_after);
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t base = b * N * stride_after;
      for (std::size_t s = 0; s < stride_after; ++s) {
        for (int j = 0; j < N; ++j) {
          cd acc{0.0, 0.0};
          const cd* Ej = &E[static_cast<std::size_t>(j) * N];
          for (int m = 0; m < N; ++m) acc += Ej[m] * cur[base + m * stride_after + s];
          next[base + j * stride_after + s] = acc;
        }
      }
    }
    cur.swap(next);
    stride_after *= N;
  }
  return SpectralField(g, std::move(cur));
}

double chirp_time_floor(const GridSpec& g) {
  // phase advance per cell at the box edge below pi: (L/2) h / t < pi
  return 0.5 * g.length * g.spacing() / std::numbers::pi;
}

SpectralField chirp_multiply(const SpectralField& u, double t) {
  u.require_finite("chirp_multiply");
  const GridSpec& g = u.grid();
  if (!(t >= chirp_time_floor(g) * (1.0 - 1e-12)))
    throw DomainError("chirp factor needs t >= " + std::to_string(chirp_time_floor(g)) +
                      " on this grid (aliasing of the quadratic phase)");
  SpectralField out(g);
  const int N = g.points;
  std::vector<int> idx(g.rank, 0);
  for (std::size_t f = 0; f < g.size(); ++f) {
    double r2 = 0.0;
    for (int d = 0; d < g.rank; ++d) {
      const double x = g.coord(idx[d]);
      r2 += x * x;
    }
    const double ph = 0.5 * r2 / t;
    out.values()[f] = u.values()[f] * cd{std::cos(ph), std::sin(ph)};
    for (int d = g.rank - 1; d >= 0; --d) {
      if (++idx[d] < N) break;
      idx[d] = 0;
    }
  }
  return out;
}

SpectralField free_propagate_factored(const SpectralField& u, double t) {
  const GridSpec& g = u.grid();
  if (!is_self_dual(g))
    throw DomainError("factored propagator needs a self-dual grid (L = sqrt(2 pi N))");
  SpectralField w = chirp_multiply(u, t);
  w = fourier_map(w); // lands on the dual grid == g
  w = dilate(w, t);
  const double amp = std::pow(t, -0.5 * g.rank);
  const double ph = -0.25 * std::numbers::pi * g.rank; // (i t)^{-n/2}
  const cd pref = amp * cd{std::cos(ph), std::sin(ph)};
  for (auto& v : w.values()) v *= pref;
  return chirp_multiply(w, t);
}

// ---------------------------------------------------------------------------

DressedState dress_state(const SpectralField& v, const SpectralField& phi, double t) {
  if (!(v.grid() == phi.grid())) throw ShapeError("dress_state: grid mismatch");
  DressedState d;
  d.t = t;
  d.v = v;
  d.phi = phi;
  d.u_c = SpectralField(v.grid());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double ph = phi.values()[i].real();
    d.u_c.values()[i] = v.values()[i] * cd{std::cos(ph), -std::sin(ph)};
  }
  return d;
}

std::vector<DressedState> assemble_uc(const Trajectory& v_traj, const AsymptoticProfile& prof) {
  std::vector<DressedState> out;
  out.reserve(v_traj.mesh.nodes.size());
  for (std::size_t l = 0; l < v_traj.mesh.nodes.size(); ++l) {
    const double t = v_traj.mesh.nodes[l];
    out.push_back(dress_state(to_physical(prof.grid, v_traj.states_hat[l]),
                              prof.phase_field(t), t));
  }
  return out;
}

SpectralField reconstruct_u(const DressedState& dressed, double t) {
  if (!(t > 0.0)) throw DomainError("reconstruct_u requires t > 0");
  if (std::abs(t * dressed.t - 1.0) > 1e-9)
    throw DomainError("reconstruct_u: dressed state is at 1/t' = " +
                      std::to_string(1.0 / dressed.t) + ", requested t = " + std::to_string(t));
  const GridSpec& g = dressed.v.grid();
  // v_c(t) = M(t) D(t) conj(v(1/t))
  SpectralField w(g);
  for (std::size_t i = 0; i < w.size(); ++i) w.values()[i] = std::conj(dressed.v.values()[i]);
  w = dilate(w, t);
  const double amp = std::pow(t, -0.5 * g.rank);
  const double phn = -0.25 * std::numbers::pi * g.rank;
  const cd pref = amp * cd{std::cos(phn), std::sin(phn)};
  for (auto& v : w.values()) v *= pref;
  w = chirp_multiply(w, t);
  // u(t) = exp(i D_0(t) phi(1/t)) v_c(t)
  SpectralField phid = dilate(dressed.phi, t);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double ph = phid.values()[i].real();
    w.values()[i] *= cd{std::cos(ph), std::sin(ph)};
  }
  return w;
}

// ---------------------------------------------------------------------------

GrowthCheckResult fh_growth_check(const std::vector<DressedState>& dressed, double a0,
                                  const ModelParams& p, double calibrated_C_in, double fit_lo,
                                  double fit_hi) {
  if (dressed.empty()) throw DomainError("growth check needs a completed run");
  GrowthCheckResult res;
  const int one_plus_intpart = 1 + static_cast<int>(std::floor(p.rho));
  res.predicted_small_t_slope = (p.gamma - 1.0) * one_plus_intpart;

  double worst = 0.0;
  for (const auto& d : dressed) {
    const double t = d.t;
    const double nrm = sobolev_norm(d.u_c, NormSpec::sobolev(p.rho));
    const double shape =
        a0 * std::pow(1.0 + a0 * a0 * (1.0 + a0 * a0 * std::pow(t, p.gamma)) *
                                std::pow(t, p.gamma - 1.0),
                      one_plus_intpart);
    res.times.push_back(t);
    res.uc_hrho.push_back(nrm);
    res.envelope.push_back(shape);
    if (shape > 0.0) worst = std::max(worst, nrm / shape);
  }
  if (calibrated_C_in > 0.0) {
    res.calibrated_C = calibrated_C_in;
    res.envelope_holds = worst <= calibrated_C_in * (1.0 + 1e-12);
  } else {
    res.calibrated_C = worst;
    res.envelope_holds = true;
  }
  for (auto& e : res.envelope) e *= res.calibrated_C;
  res.fitted_small_t_slope = fit_decay_exponent(res.times, res.uc_hrho, fit_lo, fit_hi).slope;
  return res;
}

}  // namespace hartree
