#include "hartree_lab/experiment.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>

#include <json.hpp>

#include "hartree_lab/snapshot.hpp"

namespace hartree {

using nlohmann::json;
namespace fs = std::filesystem;

int thread_budget() {
  if (const char* env = std::getenv("HARTREE_LAB_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

namespace {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_series_csv(const fs::path& path, const std::vector<double>& t,
                      const std::vector<double>& raw, double predicted) {
  std::ofstream os(path);
  os << "t,raw_norm,normalized,predicted_exponent\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double nv = raw[i] * std::pow(t[i], -predicted);
    os << fmt17(t[i]) << ',' << fmt17(raw[i]) << ',' << fmt17(nv) << ',' << fmt17(predicted)
       << '\n';
  }
}

void write_pair_csv(const fs::path& path, const char* xname, const char* yname,
                    const std::vector<double>& x, const std::vector<double>& y) {
  std::ofstream os(path);
  os << xname << ',' << yname << '\n';
  for (std::size_t i = 0; i < x.size(); ++i) os << fmt17(x[i]) << ',' << fmt17(y[i]) << '\n';
}

struct CheckBuilder {
  const ExperimentConfig& cfg;
  const fs::path& dir;
  std::vector<CheckRecord>& out;

  bool enabled(const std::string& id) const {
    if (cfg.checks.empty()) return true;
    return std::find(cfg.checks.begin(), cfg.checks.end(), id) != cfg.checks.end();
  }

  /// envelope check over the configured window; zero series pass trivially.
  void envelope(const std::string& id, const std::string& norm_desc,
                const std::vector<double>& t, const std::vector<double>& series,
                double predicted, bool band_only = false) {
    if (!enabled(id)) return;
    CheckRecord rec;
    rec.id = id;
    rec.norm_desc = norm_desc;
    rec.predicted = predicted;
    double peak = 0.0;
    for (double v : series) peak = std::max(peak, std::abs(v));
    if (peak < 1e-13) {
      rec.pass = true;
      rec.detail = "series identically zero on this run";
      out.push_back(std::move(rec));
      return;
    }
    try {
      auto rep = verify_bound(id, norm_desc, t, series, predicted, cfg.band_limit, cfg.slope_tol,
                              cfg.window_lo, cfg.window_hi, band_only);
      rec.slope = rep.fit.slope;
      rec.ci95 = rep.fit.ci95;
      rec.band_ratio = rep.band_ratio;
      rec.pass = rep.pass();
    } catch (const std::exception& e) {
      rec.pass = false;
      rec.detail = e.what();
    }
    rec.csv = id + ".csv";
    write_series_csv(dir / rec.csv, t, series, predicted);
    out.push_back(std::move(rec));
  }

  void tolerance(const std::string& id, const std::string& desc, double value, double threshold,
                 std::string detail = {}) {
    if (!enabled(id)) return;
    CheckRecord rec;
    rec.id = id;
    rec.norm_desc = desc;
    rec.value = value;
    rec.threshold = threshold;
    rec.pass = value <= threshold;
    rec.detail = std::move(detail);
    out.push_back(std::move(rec));
  }

  void flag(const std::string& id, const std::string& desc, bool ok, std::string detail = {}) {
    if (!enabled(id)) return;
    CheckRecord rec;
    rec.id = id;
    rec.norm_desc = desc;
    rec.pass = ok;
    rec.detail = std::move(detail);
    out.push_back(std::move(rec));
  }
};

double pm_vector_norm(const GridSpec& g, const std::vector<std::vector<cd>>& comps, double order,
                      double eps) {
  double np = 0.0, nm = 0.0;
  for (const auto& c : comps) {
    const double a = spectral::weighted_norm(g, c, order + eps, true);
    const double b = spectral::weighted_norm(g, c, order - eps, true);
    np += a * a;
    nm += b * b;
  }
  return std::sqrt(std::sqrt(np) * std::sqrt(nm));
}

struct ProfileSeries {
  std::vector<double> t;
  std::vector<double> s0_a0, s0_a1, sb, sc, s_rem, phi_n2, va_mass;
};

ProfileSeries profile_series(const AsymptoticProfile& prof) {
  const auto& g = prof.grid;
  const auto& p = prof.params;
  const double n2 = 0.5 * p.n;
  const double eps = p.plus_epsilon;
  const std::size_t K = prof.mesh.nodes.size();
  ProfileSeries s;
  s.t = prof.mesh.nodes;
  s.s0_a0.resize(K);
  s.s0_a1.resize(K);
  s.sb.resize(K);
  s.sc.resize(K);
  s.s_rem.resize(K);
  s.phi_n2.resize(K);
  s.va_mass.resize(K);

  std::vector<cd> ph(g.size()), comp(g.size());
  std::vector<std::vector<cd>> comps(g.rank, std::vector<cd>(g.size()));
  auto grad_comps = [&](const std::vector<cd>& phihat) {
    for (int d = 0; d < g.rank; ++d) spectral::gradient_component(g, phihat, comps[d], d);
  };
  for (std::size_t l = 0; l < K; ++l) {
    const double t = s.t[l];
    prof.phi0_hat(t, ph);
    grad_comps(ph);
    s.s0_a0[l] = pm_vector_norm(g, comps, n2, eps);
    s.s0_a1[l] = pm_vector_norm(g, comps, 1.0 + n2, eps);
    std::vector<cd> phfull = ph;
    if (prof.level >= 1) {
      grad_comps(prof.phib_hat[l]);
      s.sb[l] = pm_vector_norm(g, comps, n2, eps);
      grad_comps(prof.phic_hat[l]);
      s.sc[l] = pm_vector_norm(g, comps, n2, eps);
      std::vector<cd> rem(g.size());
      for (std::size_t i = 0; i < rem.size(); ++i)
        rem[i] = prof.phib_hat[l][i] + prof.phic_hat[l][i];
      grad_comps(rem);
      s.s_rem[l] = pm_vector_norm(g, comps, n2, eps);
      for (std::size_t i = 0; i < phfull.size(); ++i) phfull[i] += rem[i];
      s.va_mass[l] = spectral::norm(g, prof.va_hat[l]);
    } else {
      std::vector<cd> v0hat(g.size());
      fft::forward(g, prof.v0.values(), v0hat);
      s.va_mass[l] = spectral::norm(g, v0hat);
    }
    s.phi_n2[l] = spectral::weighted_norm(g, phfull, n2, true);
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

RunResult run_experiment(const ExperimentConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  cfg.validate();
  RunResult res;
  res.dir = fs::path(cfg.output_dir);
  fs::create_directories(res.dir);
  {
    std::ofstream os(res.dir / "config.ini");
    os << cfg.serialize();
  }
  CheckBuilder cb{cfg, res.dir, res.checks};

  const ModelParams p = cfg.model_params();
  const GridSpec g = cfg.grid_spec();
  const GradedMesh mesh = cfg.profile_mesh();
  SpectralField v0 = cfg.family == "file" ? load_profile(cfg.file).v0 : cfg.make_initial_data();
  if (!(v0.grid() == g)) throw ShapeError("initial data grid does not match config grid");

  json stages;
  auto lap = [t_prev = t_start](const char*) mutable {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - t_prev).count();
    t_prev = now;
    return s;
  };

  // ---- profile ----
  AsymptoticProfile prof = iterate_approximation(cfg.level, v0, mesh, p);
  res.calib.a0 = prof.a0;
  stages["profile_seconds"] = lap("profile");

  ProfileSeries ps = profile_series(prof);
  const double l0 = p.lambda(0.0), l1 = p.lambda(1.0);
  cb.envelope("s0_decay_alpha0", "pm-norm order n/2 of s0", ps.t, ps.s0_a0, l0 - 1.0);
  cb.envelope("s0_decay_alpha1", "pm-norm order 1+n/2 of s0", ps.t, ps.s0_a1, l1 - 1.0);
  cb.envelope("sb_decay", "pm-norm order n/2 of sb", ps.t, ps.sb, l0 + l1 - 1.0);
  cb.envelope("sc_decay", "pm-norm order n/2 of sc", ps.t, ps.sc, l0 + l1 - 1.0);
  cb.envelope("s_remainder_decay", "pm-norm order n/2 of s-s0", ps.t, ps.s_rem, l0 + l1 - 1.0);
  cb.envelope("phi_decay", "homogeneous order n/2 of phi", ps.t, ps.phi_n2, p.gamma - 1.0);

  {
    double drift = 0.0;
    for (double m : ps.va_mass) drift = std::max(drift, std::abs(m - ps.va_mass[0]));
    const double rel = ps.va_mass[0] > 0 ? drift / ps.va_mass[0] : 0.0;
    cb.tolerance("va_mass_conservation", "relative L2-mass drift of v_a", rel, 1e-6);
    write_pair_csv(res.dir / "va_mass.csv", "t", "l2_mass", ps.t, ps.va_mass);
    if (!res.checks.empty()) res.checks.back().csv = "va_mass.csv";
  }
  {
    // gradient consistency at three sample nodes
    double worst = 0.0;
    for (double t : {ps.t[ps.t.size() / 4], ps.t[ps.t.size() / 2], ps.t.back()}) {
      VectorField s0f = prof.s0_field(t);
      VectorField gphi0 = gradient(prof.phi0_field(t));
      double acc = 0.0;
      for (int d = 0; d < g.rank; ++d) {
        SpectralField diff = s0f[d] - gphi0[d];
        const double nn = sobolev_norm(diff, NormSpec::sobolev(0.0));
        acc += nn * nn;
      }
      worst = std::max(worst, std::sqrt(acc));
    }
    cb.tolerance("phi0_gradient_consistency", "max ||grad phi0 - s0||_L2 at sample nodes", worst,
                 1e-8);
  }
  // transport growth constant (a_a <= a_0 exp(C a_0^2 T^{lambda_1}))
  {
    double aa = 0.0;
    if (prof.level >= 1)
      for (std::size_t l = 0; l < prof.va_hat.size(); ++l)
        aa = std::max(aa, spectral::weighted_norm(g, prof.va_hat[l], p.rho, false));
    else
      aa = prof.a0;
    const double denom = prof.a0 * prof.a0 * std::pow(mesh.final_time, l1);
    res.calib.transport_growth_C = denom > 0.0 ? std::log(std::max(aa / prof.a0, 1.0)) / denom : 0.0;
  }
  stages["profile_series_seconds"] = lap("series");

  // ---- fixed point ----
  SolverConfig sc = cfg.solver_config();
  FixedPointResult fp = solve_nonlinear_fixed_point(v0, sc, prof, p);
  res.calib.T_used = fp.T_used;
  res.calib.contraction_C = fp.contraction_C;
  res.calib.kappa_emp = fp.kappa_emp;
  res.calib.a = fp.sup_hrho;
  res.calib.a1 = transport_growth_bound(fp.sup_hrho, fp.T_used, res.calib.transport_growth_C, p);
  {
    double worst_ratio = 0.0;
    for (double r : fp.ratios) worst_ratio = std::max(worst_ratio, r);
    std::string detail = "iters=" + std::to_string(fp.iterations) +
                         " T=" + std::to_string(fp.T_used) +
                         " sup_ratio=" + std::to_string(worst_ratio) +
                         " sup||v||=" + std::to_string(fp.sup_hrho) + " R=" +
                         std::to_string(2.0 * prof.a0);
    const bool ok = fp.converged && fp.iterations <= 10 && worst_ratio < 0.5 &&
                    fp.sup_hrho <= 2.0 * prof.a0 * (1.0 + 1e-9);
    cb.flag("fixed_point", "Picard map converges inside the prescribed ball", ok,
            fp.advice.empty() ? detail : detail + " advice: " + fp.advice);
    std::vector<double> it_idx(fp.distances.size());
    for (std::size_t i = 0; i < it_idx.size(); ++i) it_idx[i] = static_cast<double>(i);
    write_pair_csv(res.dir / "fixed_point.csv", "iteration", "sup_distance", it_idx, fp.distances);
    if (!res.checks.empty()) res.checks.back().csv = "fixed_point.csv";
  }
  stages["fixed_point_seconds"] = lap("fp");

  // ---- linearized diagnostics on the converged trajectory ----
  LinearizedDiagnostics ldiag;
  Trajectory vprime = solve_linearized(fp.v, v0, 0.0, sc, prof, p, &ldiag);
  cb.tolerance("linearized_l2_conservation", "relative L2 drift of the linearized flow",
               ldiag.l2_drift, 1e-6);
  {
    const auto& ns = vprime.norms(sc.rho_prime > 0 ? sc.rho_prime : p.rho, true);
    write_pair_csv(res.dir / "linearized_conservation.csv", "t", "hrho_prime_norm",
                   vprime.mesh.nodes, ns);
    // calibrate the envelope constant over all node pairs
    const double th = p.integrability_margin();
    const double a = res.calib.a, a1 = res.calib.a1;
    const double afac = a * a * (1.0 + a * a) * (1.0 + a1 * a1) * (1.0 + a1 * a1);
    double C = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i)
      for (std::size_t j = i + 1; j < ns.size(); ++j) {
        if (!(ns[i] > 0.0) || !(ns[j] > 0.0)) continue;
        const double dt = vprime.mesh.nodes[j] - vprime.mesh.nodes[i];
        const double growth = std::log(ns[j] / ns[i]);
        if (growth > 0.0 && dt > 0.0) C = std::max(C, growth / (afac * std::pow(dt, th)));
      }
    res.calib.gronwall_C = C;
    cb.flag("gronwall_envelope", "H^rho' growth admits a single envelope constant",
            std::isfinite(C), "calibrated C = " + std::to_string(C));
  }
  {
    auto rep = holder_continuity_check(fp.v, p, sc.rho_prime, cfg.window_lo, cfg.window_hi);
    CheckRecord rec;
    rec.id = "holder_modulus";
    rec.norm_desc = rep.norm_desc;
    rec.predicted = rep.predicted;
    rec.slope = rep.fit.slope;
    rec.ci95 = rep.fit.ci95;
    rec.pass = rep.fit.slope >= rep.predicted - cfg.slope_tol;
    if (cb.enabled(rec.id)) {
      std::vector<double> dts, dns;
      const auto& first = fp.v.states_hat.front();
      std::vector<cd> diff(g.size());
      for (std::size_t l = 1; l < fp.v.mesh.nodes.size(); ++l) {
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = fp.v.states_hat[l][i] - first[i];
        dts.push_back(fp.v.mesh.nodes[l] - fp.v.mesh.nodes.front());
        dns.push_back(spectral::norm(g, diff));
      }
      rec.csv = "holder_modulus.csv";
      write_pair_csv(res.dir / rec.csv, "dt", "l2_increment", dts, dns);
      res.checks.push_back(std::move(rec));
    }
  }
  stages["linearized_seconds"] = lap("lin");

  // ---- remainder decomposition ----
  {
    VDecomposition dec = compute_v_decomposition(fp.v, prof, p);
    const double mu1 = p.mu(1.0, sc.rho_prime > 0 ? sc.rho_prime : p.rho);
    const double mu2 = p.mu(2.0, sc.rho_prime > 0 ? sc.rho_prime : p.rho);
    cb.envelope("v1_growth", "omega^(2s-2-n/2) norm of V1", dec.times, dec.v1_norm, 1.0);
    cb.envelope("v2_growth", "omega^(2s-1-n/2) norm of V2", dec.times, dec.v2_norm, l0);
    cb.envelope("v3_growth", "omega^(2s-1-n/2) norm of V3", dec.times, dec.v3_norm, l0 + l1);
    cb.envelope("v5_growth", "omega^(2s-2-n/2) norm of V5", dec.times, dec.v5_norm, 2.0 * l0);
    {
      std::vector<double> pairing(dec.times.size());
      for (std::size_t i = 0; i < pairing.size(); ++i)
        pairing[i] = std::max({dec.v4_pairing[i][0], dec.v4_pairing[i][1], dec.v4_pairing[i][2]});
      cb.envelope("v4_pairing", "sup over bump family of |<psi, V4>| / psi-norm", dec.times,
                  pairing, l0 + 1.0);
    }
    cb.envelope("cut_v1", "t^(g-2) cutoff-smoothed V1", dec.times, dec.cut_v1, mu1 - 1.0);
    cb.envelope("cut_v3", "t^(g-2) cutoff-smoothed V3", dec.times, dec.cut_v3, 2.0 * l0 + mu1 - 2.0);
    cb.envelope("cut_v4", "t^(g-2) cutoff-smoothed V4", dec.times, dec.cut_v4, l0 + mu2 - 1.0);
    cb.envelope("cut_v5", "t^(g-2) cutoff-smoothed V5", dec.times, dec.cut_v5, 2.0 * l0 + mu1 - 2.0);
    cb.tolerance("decomposition_identity", "sup L2 residual of the mass-difference identity",
                 dec.sup_identity_residual, 1e-4);
    write_pair_csv(res.dir / "decomposition_identity.csv", "t", "l2_residual", dec.times,
                   dec.residual_identity);
    if (!res.checks.empty()) res.checks.back().csv = "decomposition_identity.csv";
    cb.tolerance("subdecomposition_identity", "sup L2 defect of V2 = V3+V4+V5",
                 dec.sup_subdecomp_defect, 1e-6);
    write_pair_csv(res.dir / "subdecomposition_identity.csv", "t", "l2_defect", dec.times,
                   dec.subdecomp_defect);
    if (!res.checks.empty()) res.checks.back().csv = "subdecomposition_identity.csv";
  }
  stages["decomposition_seconds"] = lap("dec");

  // ---- dressed amplitude ----
  {
    auto dressed = assemble_uc(fp.v, prof);
    auto gc = fh_growth_check(dressed, prof.a0, p, 0.0, cfg.window_lo, cfg.window_hi);
    res.calib.uc_growth_C = gc.calibrated_C;
    const bool slope_ok = gc.fitted_small_t_slope >= gc.predicted_small_t_slope - cfg.slope_tol;
    cb.flag("uc_growth_envelope", "dressed amplitude under the growth envelope",
            gc.envelope_holds && slope_ok,
            "C = " + std::to_string(gc.calibrated_C) +
                ", fitted slope = " + std::to_string(gc.fitted_small_t_slope) +
                ", predicted = " + std::to_string(gc.predicted_small_t_slope));
    std::ofstream os(res.dir / "uc_growth.csv");
    os << "t,uc_hrho,envelope\n";
    for (std::size_t i = 0; i < gc.times.size(); ++i)
      os << fmt17(gc.times[i]) << ',' << fmt17(gc.uc_hrho[i]) << ',' << fmt17(gc.envelope[i])
         << '\n';
    if (!res.checks.empty()) res.checks.back().csv = "uc_growth.csv";
  }
  stages["dressing_seconds"] = lap("uc");

  if (cfg.save_snapshots == "profile" || cfg.save_snapshots == "all")
    save_profile(prof, res.dir / "profile.snap");
  if (cfg.save_snapshots == "all") {
    save_trajectory(fp.v, res.dir / "trajectory.snap");
    save_trajectory(vprime, res.dir / "vprime.snap");
  }

  res.all_pass = std::all_of(res.checks.begin(), res.checks.end(),
                             [](const CheckRecord& c) { return c.pass; });
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  json j;
  j["config"] = cfg.serialize();
  j["grid"] = {{"rank", g.rank}, {"points", g.points}, {"length", g.length}};
  j["mesh"] = {{"nodes", mesh.count}, {"power", mesh.power}, {"t1", mesh.nodes.front()}};
  j["params"] = {{"gamma", p.gamma},
                 {"rho", p.rho},
                 {"kappa", p.kappa},
                 {"n", p.n},
                 {"riesz_constant", p.riesz_constant},
                 {"lambda0", l0},
                 {"lambda1", l1},
                 {"lambda2", p.lambda(2.0)},
                 {"integrability_margin", p.integrability_margin()},
                 {"plus_epsilon", p.plus_epsilon}};
  j["calibrations"] = {{"transport_growth_C", res.calib.transport_growth_C},
                       {"gronwall_C", res.calib.gronwall_C},
                       {"uc_growth_C", res.calib.uc_growth_C},
                       {"contraction_C", res.calib.contraction_C},
                       {"kappa_emp", res.calib.kappa_emp},
                       {"T_used", res.calib.T_used},
                       {"a0", res.calib.a0},
                       {"a", res.calib.a},
                       {"a1", res.calib.a1}};
  j["metadata"] = {{"wall_seconds", res.wall_seconds},
                   {"stages", stages},
                   {"committed_t1_error", prof.committed_t1_error},
                   {"interp_uses", prof.interp_uses->load()},
                   {"transform_determinism",
                    "FFT plans use estimate-mode planning only; identical config and seed "
                    "reproduce identical CSV bytes on one platform"}};
  json jchecks = json::array();
  for (const auto& c : res.checks) {
    json jc = {{"id", c.id},        {"norm", c.norm_desc}, {"pass", c.pass},
               {"detail", c.detail}, {"csv", c.csv}};
    if (std::isfinite(c.predicted)) jc["predicted_exponent"] = c.predicted;
    if (std::isfinite(c.slope)) jc["fitted_slope"] = c.slope;
    if (std::isfinite(c.ci95)) jc["slope_ci95"] = c.ci95;
    if (std::isfinite(c.band_ratio)) jc["band_ratio"] = c.band_ratio;
    if (std::isfinite(c.value)) jc["value"] = c.value;
    if (std::isfinite(c.threshold)) jc["threshold"] = c.threshold;
    jchecks.push_back(std::move(jc));
  }
  j["checks"] = std::move(jchecks);
  j["all_pass"] = res.all_pass;
  std::ofstream os(res.dir / "summary.json");
  os << j.dump(2) << "\n";
  return res;
}

// ---------------------------------------------------------------------------

void write_report(const std::filesystem::path& run_dir, std::ostream& os) {
  const fs::path sj = run_dir / "summary.json";
  if (!fs::exists(sj)) {
    std::vector<std::string> missing{sj.string()};
    throw DomainError("incomplete run directory; missing: " + sj.string());
  }
  json j;
  {
    std::ifstream is(sj);
    is >> j;
  }
  os << "run: " << run_dir.string() << "\n";
  os << "grid " << j["grid"]["points"].get<int>() << "^" << j["grid"]["rank"].get<int>()
     << ", mesh nodes " << j["mesh"]["nodes"].get<int>() << ", gamma "
     << j["params"]["gamma"].get<double>() << ", rho " << j["params"]["rho"].get<double>()
     << ", kappa " << j["params"]["kappa"].get<double>() << "\n";
  os << "calibrations: ";
  for (auto& [k, v] : j["calibrations"].items()) os << k << "=" << v.dump() << " ";
  os << "\n\n";
  os << std::left << std::setw(28) << "check" << std::setw(11) << "predicted" << std::setw(11)
     << "slope" << std::setw(11) << "band" << std::setw(11) << "value" << std::setw(8)
     << "verdict" << "series\n";
  std::vector<std::string> gaps;
  for (const auto& c : j["checks"]) {
    auto num = [&](const char* key) -> std::string {
      if (!c.contains(key)) return "-";
      std::ostringstream ss;
      ss << std::setprecision(4) << c[key].get<double>();
      return ss.str();
    };
    os << std::setw(28) << c["id"].get<std::string>() << std::setw(11)
       << num("predicted_exponent") << std::setw(11) << num("fitted_slope") << std::setw(11)
       << num("band_ratio") << std::setw(11) << num("value") << std::setw(8)
       << (c["pass"].get<bool>() ? "pass" : "FAIL");
    const std::string csv = c.value("csv", std::string{});
    os << csv << "\n";
    if (!csv.empty() && !fs::exists(run_dir / csv)) gaps.push_back(csv);
  }
  if (!gaps.empty()) {
    os << "\nmissing series files:\n";
    for (const auto& gp : gaps) os << "  " << gp << "\n";
  }
  os << "\noverall: " << (j["all_pass"].get<bool>() ? "pass" : "FAIL") << "\n";
}

// ---------------------------------------------------------------------------

SweepResult run_sweep(ExperimentConfig base, const std::string& dotted_key,
                      const std::vector<std::string>& values, int jobs) {
  if (values.empty()) throw DomainError("sweep needs at least one value");
  if (jobs <= 0) jobs = thread_budget();
  const fs::path root = fs::path(base.output_dir);
  std::vector<ExperimentConfig> cfgs;
  for (const auto& v : values) {
    ExperimentConfig c = base;
    apply_override(c, dotted_key, v);
    std::string tag = v;
    std::replace(tag.begin(), tag.end(), '/', '_');
    c.output_dir = (root / ("sweep_" + tag)).string();
    c.validate();
    cfgs.push_back(std::move(c));
  }

  SweepResult sr;
  sr.runs.resize(cfgs.size());
  std::size_t next = 0;
  while (next < cfgs.size()) {
    const std::size_t batch = std::min<std::size_t>(jobs, cfgs.size() - next);
    std::vector<std::future<RunResult>> futs;
    for (std::size_t b = 0; b < batch; ++b)
      futs.push_back(std::async(std::launch::async, run_experiment, cfgs[next + b]));
    for (std::size_t b = 0; b < batch; ++b) sr.runs[next + b] = futs[b].get();
    next += batch;
  }

  sr.all_pass = std::all_of(sr.runs.begin(), sr.runs.end(),
                            [](const RunResult& r) { return r.all_pass; });
  auto stable = [&](auto getter) {
    double lo = 1e300, hi = 0.0;
    for (const auto& r : sr.runs) {
      const double v = getter(r);
      if (v <= 0.0) return true; // not calibrated on this run
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return hi <= 3.0 * lo;
  };
  sr.constants_stable = stable([](const RunResult& r) { return r.calib.gronwall_C; }) &&
                        stable([](const RunResult& r) { return r.calib.uc_growth_C; });

  json j;
  j["key"] = dotted_key;
  j["values"] = values;
  j["all_pass"] = sr.all_pass;
  j["constants_stable_x3"] = sr.constants_stable;
  json runs = json::array();
  for (const auto& r : sr.runs)
    runs.push_back({{"dir", r.dir.string()},
                    {"all_pass", r.all_pass},
                    {"gronwall_C", r.calib.gronwall_C},
                    {"uc_growth_C", r.calib.uc_growth_C},
                    {"T_used", r.calib.T_used}});
  j["runs"] = std::move(runs);
  fs::create_directories(root);
  std::ofstream os(root / "sweep_summary.json");
  os << j.dump(2) << "\n";
  return sr;
}

}  // namespace hartree
