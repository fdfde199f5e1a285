#include "hartree_lab/cauchy.hpp"

#include <algorithm>
#include <cmath>

namespace hartree {

namespace {

// int_a^b t^beta dt, signed, beta != -1 safe here (beta > -1 everywhere used)
double power_int(double a, double b, double beta) {
  if (std::abs(beta + 1.0) < 1e-14) return std::log(b / a);
  return (std::pow(b, beta + 1.0) - std::pow(a, beta + 1.0)) / (beta + 1.0);
}

long long quantize(double x) { return llround(x * 1e12); }

GradedMesh prefix_mesh(const GradedMesh& mesh, std::size_t last_index) {
  GradedMesh m = mesh;
  m.nodes.assign(mesh.nodes.begin(), mesh.nodes.begin() + last_index + 1);
  m.final_time = m.nodes.back();
  m.count = static_cast<int>(m.nodes.size());
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Trajectory

Trajectory Trajectory::constant_in_time(const GridSpec& g, const GradedMesh& mesh,
                                        const SpectralField& v0) {
  Trajectory t;
  t.grid = g;
  t.mesh = mesh;
  std::vector<cd> c(g.size());
  fft::forward(g, v0.values(), c);
  spectral::dealias(g, c);
  t.states_hat.assign(mesh.nodes.size(), c);
  return t;
}

void Trajectory::state_hat_at(double t, std::span<cd> out) const {
  const auto& ts = mesh.nodes;
  if (states_hat.empty()) throw ShapeError("empty trajectory");
  if (t <= ts.front()) {
    std::copy(states_hat.front().begin(), states_hat.front().end(), out.begin());
    return;
  }
  if (t >= ts.back()) {
    std::copy(states_hat.back().begin(), states_hat.back().end(), out.begin());
    return;
  }
  const std::size_t i = mesh.index_at_or_below(t);
  if (ts[i] == t) {
    std::copy(states_hat[i].begin(), states_hat[i].end(), out.begin());
    return;
  }
  interp_uses->fetch_add(1, std::memory_order_relaxed);
  const double w = (std::log(t) - std::log(ts[i])) / (std::log(ts[i + 1]) - std::log(ts[i]));
  const auto& lo = states_hat[i];
  const auto& hi = states_hat[i + 1];
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = (1.0 - w) * lo[j] + w * hi[j];
}

SpectralField Trajectory::state_at(double t) const {
  std::vector<cd> c(grid.size());
  state_hat_at(t, c);
  return to_physical(grid, c);
}

const std::vector<double>& Trajectory::norms(double sigma, bool homogeneous) const {
  auto key = std::make_pair(quantize(sigma), homogeneous);
  auto it = norm_cache_.find(key);
  if (it != norm_cache_.end()) return it->second;
  std::vector<double> ns(states_hat.size());
  for (std::size_t i = 0; i < states_hat.size(); ++i)
    ns[i] = spectral::weighted_norm(grid, states_hat[i], sigma, homogeneous);
  return norm_cache_.emplace(key, std::move(ns)).first->second;
}

double Trajectory::sup_norm(double sigma, bool homogeneous) const {
  const auto& ns = norms(sigma, homogeneous);
  return *std::max_element(ns.begin(), ns.end());
}

// ---------------------------------------------------------------------------
// the per-step propagator

namespace {

class Stepper {
 public:
  Stepper(const AsymptoticProfile& prof, const ModelParams& p, const Trajectory* frozen_v,
          const SolverConfig& cfg)
      : prof_(prof), p_(p), frozen_(frozen_v), cfg_(cfg), g_(prof.grid), sz_(g_.size()),
        theta_(sz_), phavg_(sz_), cw_(sz_), w_(sz_), vphys_(sz_), w2v_(sz_), w2a_(sz_),
        fS_(sz_), fD_(sz_), grad_(g_.rank, std::vector<cd>(sz_)),
        svel_(g_.rank, std::vector<double>(sz_)), sdiv_(sz_), taylor_term_(sz_),
        taylor_next_(sz_) {}

  long substeps = 0;

  /// advance coefficients from time a to time b (either direction).
  void step(std::vector<cd>& state, double a, double b, int depth = 0) {
    const double pre = spectral::norm(g_, state);
    step_once(state, a, b);
    const double post = spectral::norm(g_, state);
    if (pre > 0.0 && std::abs(post - pre) / pre > cfg_.l2_drift_guard) {
      if (depth >= cfg_.max_step_retries)
        throw StabilityError("per-step L^2 drift persisted through " +
                             std::to_string(depth) + " halvings");
      state = saved_;
      ++substeps;
      const double mid = std::sqrt(a * b);
      step(state, a, mid, depth + 1);
      step(state, mid, b, depth + 1);
    }
  }

 private:
  void step_once(std::vector<cd>& state, double a, double b) {
    saved_ = state;
    const double dt = b - a;
    const double tg = std::sqrt(a * b);

    spectral::kinetic_phase(g_, state, 0.5 * dt);
    build_phase(a, b, tg);
    build_transport(a, b, tg);

    // phase(theta/2) . transport(dt) . phase(theta/2), phases applied physically
    fft::inverse(g_, state, vphys_);
    rotate_half();
    fft::forward(g_, vphys_, state);
    spectral::dealias(g_, state);
    taylor_exp(state, dt);
    fft::inverse(g_, state, vphys_);
    rotate_half();
    fft::forward(g_, vphys_, state);
    spectral::dealias(g_, state);

    spectral::kinetic_phase(g_, state, 0.5 * dt);
  }

  void rotate_half() {
    for (std::size_t i = 0; i < sz_; ++i) {
      const double th = 0.5 * theta_[i];
      vphys_[i] *= cd{std::cos(th), -std::sin(th)};
    }
  }

  /// theta = int_a^b of the real multiplication potential, each piece frozen
  /// at t_g and weighted by the exact integral of its power-law envelope.
  void build_phase(double a, double b, double tg) {
    const double gamma = p_.gamma;
    const double l0 = p_.lambda(0.0), l1 = p_.lambda(1.0);

    // |v(t_g)|^2 and |v_a(t_g)|^2 coefficients
    if (frozen_) {
      frozen_->state_hat_at(tg, cw_);
    } else {
      fft::forward(g_, prof_.v0.values(), cw_);
    }
    fft::inverse(g_, cw_, vphys_);
    for (std::size_t i = 0; i < sz_; ++i) w_[i] = cd{std::norm(vphys_[i]), 0.0};
    fft::forward(g_, w_, w2v_);
    spectral::dealias(g_, w2v_);

    prof_.va_hat_at(tg, cw_);
    fft::inverse(g_, cw_, vphys_);
    for (std::size_t i = 0; i < sz_; ++i) w_[i] = cd{std::norm(vphys_[i]), 0.0};
    fft::forward(g_, w_, w2a_);
    spectral::dealias(g_, w2a_);

    // short-range part: full minus low-cutoff multiplier on |v|^2
    hartree_multiplier(g_, p_, w2v_, fS_, std::nullopt);
    hartree_multiplier(g_, p_, w2v_, cw_, tg);
    for (std::size_t i = 0; i < sz_; ++i) fS_[i] -= cw_[i];
    fft::inverse(g_, fS_, fS_);

    // long-range difference: chi_L omega^{gamma-n} (|v|^2 - |v_a|^2)
    for (std::size_t i = 0; i < sz_; ++i) w_[i] = w2v_[i] - w2a_[i];
    hartree_multiplier(g_, p_, w_, fD_, tg);
    fft::inverse(g_, fD_, fD_);

    const double wS = power_int(a, b, gamma - 2.0);
    const double bD = 2.0 * gamma + l1 - 2.0;
    const double wD = power_int(a, b, bD) * std::pow(tg, (gamma - 2.0) - bD);
    const double bB = prof_.has_phase_velocity_reference() ? 2.0 * l0 + l1 - 2.0 : 2.0 * gamma - 2.0;
    const double wB = power_int(a, b, bB) * std::pow(tg, -bB);

    // |s|^2 - |s_0|^2 at t_g (level 0: reference s_{-1} = 0, so plain |s|^2)
    phavg_.assign(sz_, cd{0.0, 0.0});
    prof_.phase_hat(tg, phavg_);
    for (std::size_t i = 0; i < sz_; ++i) theta_[i] = 0.0;
    accumulate_speed_sq(phavg_, +0.5 * wB);
    if (prof_.has_phase_velocity_reference()) {
      prof_.phi0_hat(tg, phavg_);
      accumulate_speed_sq(phavg_, -0.5 * wB);
    }
    for (std::size_t i = 0; i < sz_; ++i)
      theta_[i] += wS * fS_[i].real() + wD * fD_[i].real();
  }

  void accumulate_speed_sq(const std::vector<cd>& phihat, double weight) {
    for (int d = 0; d < g_.rank; ++d) {
      spectral::gradient_component(g_, phihat, cw_, d);
      fft::inverse(g_, cw_, grad_[d]);
    }
    for (std::size_t i = 0; i < sz_; ++i) {
      double acc = 0.0;
      for (int d = 0; d < g_.rank; ++d) acc += std::norm(grad_[d][i]);
      theta_[i] += weight * acc;
    }
  }

  /// transport velocity from the time-averaged phase over [a, b]
  void build_transport(double a, double b, double tg) {
    prof_.phi0_hat_avg(a, b, phavg_);
    if (prof_.level >= 1) {
      prof_.phibc_hat(tg, cw_);
      for (std::size_t i = 0; i < sz_; ++i) phavg_[i] += cw_[i];
    }
    const auto& ksq = mode_tables(g_).ksq;
    for (int d = 0; d < g_.rank; ++d) {
      spectral::gradient_component(g_, phavg_, cw_, d);
      fft::inverse(g_, cw_, grad_[d]);
      for (std::size_t i = 0; i < sz_; ++i) svel_[d][i] = grad_[d][i].real();
    }
    for (std::size_t i = 0; i < sz_; ++i) cw_[i] = -ksq[i] * phavg_[i];
    fft::inverse(g_, cw_, w_);
    for (std::size_t i = 0; i < sz_; ++i) sdiv_[i] = w_[i].real();
  }

  void apply_generator(std::span<const cd> vhat, std::span<cd> out) {
    for (int d = 0; d < g_.rank; ++d) {
      spectral::gradient_component(g_, vhat, cw_, d);
      fft::inverse(g_, cw_, grad_[d]);
    }
    fft::inverse(g_, vhat, vphys_);
    for (std::size_t i = 0; i < sz_; ++i) {
      cd acc = 0.5 * sdiv_[i] * vphys_[i];
      for (int d = 0; d < g_.rank; ++d) acc += svel_[d][i] * grad_[d][i];
      w_[i] = acc;
    }
    fft::forward(g_, w_, out);
    spectral::dealias(g_, out);
  }

  void taylor_exp(std::vector<cd>& state, double dt) {
    taylor_term_ = state;
    for (int j = 1; j <= cfg_.taylor_order; ++j) {
      apply_generator(taylor_term_, taylor_next_);
      const double c = dt / j;
      for (std::size_t i = 0; i < sz_; ++i) {
        taylor_next_[i] *= c;
        state[i] += taylor_next_[i];
      }
      taylor_term_.swap(taylor_next_);
    }
  }

  const AsymptoticProfile& prof_;
  const ModelParams& p_;
  const Trajectory* frozen_;
  const SolverConfig& cfg_;
  const GridSpec& g_;
  std::size_t sz_;
  std::vector<double> theta_;
  std::vector<cd> phavg_, cw_, w_, vphys_, w2v_, w2a_, fS_, fD_;
  std::vector<std::vector<cd>> grad_;
  std::vector<std::vector<double>> svel_;
  std::vector<double> sdiv_;
  std::vector<cd> taylor_term_, taylor_next_, saved_;
};

}  // namespace

// ---------------------------------------------------------------------------

SpectralField apply_L(const SpectralField& v_state, const SpectralField& vprime_state,
                      const AsymptoticProfile& prof, double t, const ModelParams& p,
                      LTerms* terms) {
  if (!(t > 0.0)) throw DomainError("apply_L requires t > 0");
  v_state.require_finite("apply_L");
  vprime_state.require_finite("apply_L");
  const auto& g = prof.grid;
  if (!(v_state.grid() == g) || !(vprime_state.grid() == g))
    throw ShapeError("apply_L: fields on mismatched grids");
  const std::size_t sz = g.size();

  std::vector<cd> vp_hat(sz);
  fft::forward(g, vprime_state.values(), vp_hat);
  spectral::dealias(g, vp_hat);

  // kinetic
  const auto& ksq = mode_tables(g).ksq;
  std::vector<cd> tmp(sz);
  for (std::size_t i = 0; i < sz; ++i) tmp[i] = 0.5 * ksq[i] * vp_hat[i];
  SpectralField kinetic = to_physical(g, tmp);

  // transport: i s.grad v' + (i/2)(div s) v'
  std::vector<cd> ph(sz);
  prof.phase_hat(t, ph);
  SpectralField transport(g);
  {
    std::vector<cd> comp(sz);
    std::vector<cd> gradv(sz);
    SpectralField vp_phys = to_physical(g, vp_hat);
    std::vector<cd> acc(sz, cd{0, 0});
    for (int d = 0; d < g.rank; ++d) {
      spectral::gradient_component(g, ph, comp, d);
      auto sphys = to_physical(g, comp);
      spectral::gradient_component(g, vp_hat, gradv, d);
      auto dvp = to_physical(g, gradv);
      for (std::size_t i = 0; i < sz; ++i)
        acc[i] += cd{0, 1} * sphys.values()[i].real() * dvp.values()[i];
    }
    for (std::size_t i = 0; i < sz; ++i) tmp[i] = -ksq[i] * ph[i];
    auto divs = to_physical(g, tmp);
    for (std::size_t i = 0; i < sz; ++i)
      acc[i] += cd{0, 0.5} * divs.values()[i].real() * vp_phys.values()[i];
    transport = SpectralField(g, std::move(acc));
  }

  // multiplication pieces
  auto w2_of = [&](const SpectralField& f, std::vector<cd>& out_hat) {
    std::vector<cd> w(sz);
    for (std::size_t i = 0; i < sz; ++i) w[i] = cd{std::norm(f.values()[i]), 0.0};
    fft::forward(g, w, out_hat);
    spectral::dealias(g, out_hat);
  };
  std::vector<cd> w2v(sz), w2a(sz);
  w2_of(v_state, w2v);
  w2_of(prof.va_field(t), w2a);

  const double pref = std::pow(t, p.gamma - 2.0);
  std::vector<cd> gfull(sz), glow(sz);
  hartree_multiplier(g, p, w2v, gfull, std::nullopt);
  hartree_multiplier(g, p, w2v, glow, t);
  for (std::size_t i = 0; i < sz; ++i) gfull[i] -= glow[i]; // chi_S part
  SpectralField gS = to_physical(g, gfull);

  for (std::size_t i = 0; i < sz; ++i) tmp[i] = w2v[i] - w2a[i];
  hartree_multiplier(g, p, tmp, glow, t);
  SpectralField gD = to_physical(g, glow);

  // (1/2)(|s|^2 - |s_{m-1}|^2)
  SpectralField wB(g);
  {
    auto speed_sq = [&](const std::vector<cd>& phihat, double sign) {
      std::vector<cd> comp(sz);
      for (int d = 0; d < g.rank; ++d) {
        spectral::gradient_component(g, phihat, comp, d);
        auto sp = to_physical(g, comp);
        for (std::size_t i = 0; i < sz; ++i)
          wB.values()[i] += sign * 0.5 * std::norm(sp.values()[i]);
      }
    };
    speed_sq(ph, +1.0);
    if (prof.has_phase_velocity_reference()) {
      std::vector<cd> ph0(sz);
      prof.phi0_hat(t, ph0);
      speed_sq(ph0, -1.0);
    }
  }

  SpectralField vp_phys = to_physical(g, vp_hat);
  SpectralField g_short(g), g_long_diff(g), phase_vel(g), total(g);
  for (std::size_t i = 0; i < sz; ++i) {
    const cd vp = vp_phys.values()[i];
    g_short.values()[i] = pref * gS.values()[i].real() * vp;
    g_long_diff.values()[i] = pref * gD.values()[i].real() * vp;
    phase_vel.values()[i] = wB.values()[i].real() * vp;
    total.values()[i] = kinetic.values()[i] + transport.values()[i] + g_short.values()[i] +
                        g_long_diff.values()[i] + phase_vel.values()[i];
  }
  if (terms) {
    terms->kinetic = std::move(kinetic);
    terms->transport = std::move(transport);
    terms->g_short = std::move(g_short);
    terms->g_long_diff = std::move(g_long_diff);
    terms->phase_velocity = std::move(phase_vel);
  }
  return total;
}

// ---------------------------------------------------------------------------

Trajectory solve_linearized(const Trajectory& v_traj, const SpectralField& vprime0, double t0,
                            const SolverConfig& cfg, const AsymptoticProfile& prof,
                            const ModelParams& p, LinearizedDiagnostics* diag) {
  vprime0.require_finite("solve_linearized");
  if (!(vprime0.grid() == prof.grid)) throw ShapeError("solve_linearized: grid mismatch");
  const auto& mesh = v_traj.mesh;
  const std::size_t K = mesh.nodes.size();
  if (v_traj.states_hat.size() != K) throw ShapeError("trajectory does not cover its mesh");

  std::size_t start = 0;
  if (t0 > 0.0 && t0 > mesh.nodes.front() * (1.0 + 1e-12)) {
    start = mesh.index_at_or_below(t0);
    const double tn = mesh.nodes[start];
    if (std::abs(tn - t0) > 1e-9 * std::max(t0, 1e-300))
      throw DomainError("t0 must be 0 or a mesh node; nearest node is " + std::to_string(tn));
  }

  Trajectory out;
  out.grid = prof.grid;
  out.mesh = mesh;
  out.states_hat.assign(K, {});
  std::vector<cd> state(prof.grid.size());
  fft::forward(prof.grid, vprime0.values(), state);
  spectral::dealias(prof.grid, state);
  out.states_hat[start] = state;

  Stepper stepper(prof, p, &v_traj, cfg);
  const double n0 = spectral::norm(prof.grid, state);
  double drift = 0.0;

  auto record = [&](std::size_t idx, const std::vector<cd>& s) {
    out.states_hat[idx] = s;
    if (n0 > 0.0)
      drift = std::max(drift, std::abs(spectral::norm(prof.grid, s) - n0) / n0);
  };

  auto run = state;
  for (std::size_t k = start; k + 1 < K; ++k) {
    stepper.step(run, mesh.nodes[k], mesh.nodes[k + 1]);
    record(k + 1, run);
  }
  run = state;
  for (std::size_t k = start; k > 0; --k) {
    stepper.step(run, mesh.nodes[k], mesh.nodes[k - 1]);
    record(k - 1, run);
  }

  if (diag) {
    diag->l2_drift = drift;
    diag->substeps = stepper.substeps;
    diag->interp_uses = prof.interp_uses->load() + v_traj.interp_uses->load();
  }
  return out;
}

double gronwall_envelope(double t, double a, double a1, double C, const ModelParams& p) {
  const double th = p.integrability_margin();
  if (t <= 0.0) return 1.0;
  return std::exp(C * a * a * (1.0 + a * a) * (1.0 + a1 * a1) * (1.0 + a1 * a1) * std::pow(t, th));
}

double transport_growth_bound(double a, double T, double C, const ModelParams& p) {
  return a * std::exp(C * a * a * std::pow(T, p.lambda(1.0)));
}

double solve_smallness_time(double C, double R, const ModelParams& p, double cap) {
  const double th = p.integrability_margin();
  if (!(th > 0.0)) throw DomainError("smallness relation needs a positive integrability margin");
  const double denom = C * R * R * std::pow(1.0 + R * R, 3.0);
  if (!(denom > 0.0)) return cap;
  return std::min(cap, std::pow(1.0 / denom, 1.0 / th));
}

// ---------------------------------------------------------------------------

FixedPointResult solve_nonlinear_fixed_point(const SpectralField& v0, SolverConfig cfg,
                                             const AsymptoticProfile& prof, const ModelParams& p) {
  v0.require_finite("solve_nonlinear_fixed_point");
  if (cfg.rho_prime == 0.0) cfg.rho_prime = p.rho;
  const double a0 = sobolev_norm(v0, NormSpec::sobolev(p.rho));
  const double R = 2.0 * a0;
  const double theta = p.integrability_margin();

  FixedPointResult res;

  auto sup_distance = [&](const Trajectory& x, const Trajectory& y) {
    double m = 0.0;
    std::vector<cd> d(prof.grid.size());
    for (std::size_t i = 0; i < x.states_hat.size(); ++i) {
      for (std::size_t j = 0; j < d.size(); ++j) d[j] = x.states_hat[i][j] - y.states_hat[i][j];
      m = std::max(m, spectral::weighted_norm(prof.grid, d, p.rho, false));
    }
    return m;
  };

  // choose the time interval
  Trajectory cur = Trajectory::constant_in_time(prof.grid, prof.mesh, v0);
  std::vector<Trajectory> warm; // iterates computed during calibration at T_ref
  if (cfg.T <= 0.0) {
    if (cfg.contraction_C <= 0.0) {
      // calibrate the contraction coefficient on the full interval
      Trajectory it1 = solve_linearized(cur, v0, 0.0, cfg, prof, p);
      const double d0 = sup_distance(it1, cur);
      Trajectory it2 = solve_linearized(it1, v0, 0.0, cfg, prof, p);
      const double d1 = sup_distance(it2, it1);
      const double Tref = prof.mesh.final_time;
      res.kappa_emp = (d0 > 0.0 ? (d1 / d0) : 0.0) / std::pow(Tref, theta);
      cfg.contraction_C =
          cfg.calibration_safety * res.kappa_emp / (R * R * std::pow(1.0 + R * R, 3.0));
      warm.push_back(std::move(it1));
      warm.push_back(std::move(it2));
    }
    cfg.T = solve_smallness_time(cfg.contraction_C, R, p, prof.mesh.final_time);
  }
  res.contraction_C = cfg.contraction_C;

  const std::size_t last = prof.mesh.index_at_or_below(cfg.T * (1.0 + 1e-12));
  GradedMesh mesh = prefix_mesh(prof.mesh, last);
  res.T_used = mesh.final_time;

  const bool reuse_warm = !warm.empty() && std::abs(mesh.final_time - prof.mesh.final_time) < 1e-15;
  if (reuse_warm) {
    res.distances.push_back(sup_distance(warm[0], cur));
    res.distances.push_back(sup_distance(warm[1], warm[0]));
    if (res.distances[0] > 0.0) res.ratios.push_back(res.distances[1] / res.distances[0]);
    cur = std::move(warm[1]);
    res.iterations = 1;
    if (res.distances.back() < cfg.fixed_point_tol) {
      res.converged = true;
      res.v = std::move(cur);
      res.sup_hrho = res.v.sup_norm(p.rho);
      res.interp_uses = prof.interp_uses->load();
      return res;
    }
  } else if (mesh.nodes.size() != prof.mesh.nodes.size()) {
    cur = Trajectory::constant_in_time(prof.grid, mesh, v0);
  }

  int expanding_streak = 0;
  for (int it = res.iterations; it < cfg.max_iterations; ++it) {
    Trajectory next = solve_linearized(cur, v0, 0.0, cfg, prof, p);
    const double d = sup_distance(next, cur);
    res.distances.push_back(d);
    if (res.distances.size() >= 2) {
      const double prev = res.distances[res.distances.size() - 2];
      if (prev > 0.0) {
        const double r = d / prev;
        res.ratios.push_back(r);
        expanding_streak = r > 1.0 ? expanding_streak + 1 : 0;
      }
    }
    cur = std::move(next);
    res.iterations = it + 1;
    if (res.distances.size() >= 2 && d < cfg.fixed_point_tol) {
      res.converged = true;
      break;
    }
    if (expanding_streak >= 2) {
      res.advice = "iteration expanding twice in a row; retry with a smaller final time T";
      break;
    }
  }
  if (!res.converged && res.advice.empty())
    res.advice = "max_iterations reached without contraction below tolerance";
  res.v = std::move(cur);
  res.sup_hrho = res.v.sup_norm(p.rho);
  res.interp_uses = prof.interp_uses->load();
  return res;
}

double difference_monitor(const LinearizedRun& run1, const LinearizedRun& run2,
                          const AsymptoticProfile& prof, const ModelParams& p, double rho_prime) {
  if (rho_prime == 0.0) rho_prime = p.rho;
  const auto& g = prof.grid;
  if (run1.vprime.states_hat.size() != run2.vprime.states_hat.size())
    throw ShapeError("difference_monitor: runs on different meshes");
  std::vector<cd> d(g.size());
  double sup_vp = 0.0, sup_v = 0.0;
  for (std::size_t i = 0; i < run1.vprime.states_hat.size(); ++i) {
    for (std::size_t j = 0; j < d.size(); ++j)
      d[j] = 0.5 * (run2.vprime.states_hat[i][j] - run1.vprime.states_hat[i][j]);
    sup_vp = std::max(sup_vp, spectral::weighted_norm(g, d, rho_prime, false));
    for (std::size_t j = 0; j < d.size(); ++j)
      d[j] = 0.5 * (run2.v_input.states_hat[i][j] - run1.v_input.states_hat[i][j]);
    sup_v = std::max(sup_v, spectral::weighted_norm(g, d, p.rho, false));
  }
  if (sup_v == 0.0) return 0.0;
  const double T = run1.vprime.mesh.final_time;
  return sup_vp / (std::pow(T, p.integrability_margin()) * sup_v);
}

}  // namespace hartree
