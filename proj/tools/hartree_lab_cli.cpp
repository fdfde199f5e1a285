#include <CLI11.hpp>

#include <iostream>

#include "hartree_lab/experiment.hpp"
#include "hartree_lab/oracles.hpp"

using namespace hartree;

namespace {

int cmd_validate(const std::string& path) {
  try {
    ExperimentConfig cfg = load_config(path);
    std::cout << "config ok\n" << cfg.serialize();
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "invalid config:\n";
    for (const auto& v : e.violations()) std::cerr << "  - " << v << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_oracle(const std::string& name, double gamma, int n, double kappa) {
  std::cout.precision(12);
  if (name == "hartree_origin") {
    const double xside = oracles::hartree_origin_gaussian(gamma, n, kappa);
    std::cout << "gaussian |u|^2 = exp(-|x|^2), origin value by radial quadrature: " << xside
              << "\n";
    return 0;
  }
  if (name == "riesz_constant") {
    const double xside = oracles::hartree_origin_gaussian(gamma, n, kappa);
    const double kside = oracles::hartree_origin_gaussian_kside(gamma, n, kappa);
    std::cout << "x-side radial quadrature: " << xside << "\n";
    std::cout << "k-side multiplier route:  " << kside << "\n";
    std::cout << "constant c(gamma,n) = " << riesz_multiplier_constant(gamma, n)
              << ", relative mismatch = " << std::abs(xside - kside) / std::abs(xside) << "\n";
    return std::abs(xside - kside) <= 1e-8 * std::abs(xside) ? 0 : 1;
  }
  if (name == "free_gaussian") {
    GridSpec g = GridSpec::make(2, 64, 20.0);
    auto u = oracles::free_gaussian_evolution(g, 1.0, 1.0, 0.7);
    const std::size_t c = g.size() / 2 + g.points / 2;
    std::cout << "closed-form free Gaussian at t=0.7, center value: " << u.values()[c] << "\n";
    return 0;
  }
  if (name == "cutoff_profile") {
    for (double l : {0.5, 1.0, 1.25, 1.5, 1.75, 2.0})
      std::cout << "chi(" << l << ") = " << chi_profile(l) << "\n";
    return 0;
  }
  std::cerr << "unknown oracle '" << name
            << "'; available: hartree_origin riesz_constant free_gaussian cutoff_profile\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudo-spectral laboratory for long-range Hartree scattering profiles"};
  app.require_subcommand(1);

  std::string config_path, out_dir, vary, run_dir, oracle_name;
  int grid_override = 0, jobs = 0;
  double tfinal_override = 0.0;
  std::uint64_t seed_override = 0;
  bool have_seed = false;

  auto* validate = app.add_subcommand("validate", "parse and validate a config");
  validate->add_option("config", config_path)->required();

  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("config", config_path)->required();
  run->add_option("--grid", grid_override, "override grid points per dimension");
  run->add_option("--tfinal", tfinal_override, "override the final time");
  auto* seed_opt = run->add_option("--seed", seed_override, "override the data seed");
  run->add_option("--out", out_dir, "override the output directory");

  auto* sweep = app.add_subcommand("sweep", "run one experiment per value of a key");
  sweep->add_option("config", config_path)->required();
  sweep->add_option("--vary", vary, "section.key=v1,v2,...")->required();
  sweep->add_option("--jobs", jobs, "concurrent runs (default: HARTREE_LAB_THREADS)");

  auto* report = app.add_subcommand("report", "summarize a completed run directory");
  report->add_option("run_dir", run_dir)->required();

  auto* oracle = app.add_subcommand("oracle", "print brute-force reference values");
  oracle->add_option("name", oracle_name)->required();
  double gamma = 0.45, kappa = 1.0;
  int n = 2;
  oracle->add_option("--gamma", gamma);
  oracle->add_option("--n", n);
  oracle->add_option("--kappa", kappa);

  CLI11_PARSE(app, argc, argv);
  have_seed = seed_opt->count() > 0;

  try {
    if (validate->parsed()) return cmd_validate(config_path);
    if (run->parsed()) {
      ExperimentConfig cfg = load_config(config_path);
      if (grid_override > 0) cfg.points = grid_override;
      if (tfinal_override > 0.0) cfg.tfinal = tfinal_override;
      if (have_seed) cfg.seed = seed_override;
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      cfg.validate();
      RunResult r = run_experiment(cfg);
      write_report(r.dir, std::cout);
      return r.all_pass ? 0 : 1;
    }
    if (sweep->parsed()) {
      const auto eq = vary.find('=');
      if (eq == std::string::npos) throw DomainError("--vary needs section.key=v1,v2,...");
      const std::string key = vary.substr(0, eq);
      std::vector<std::string> values;
      std::istringstream is(vary.substr(eq + 1));
      std::string item;
      while (std::getline(is, item, ',')) values.push_back(item);
      ExperimentConfig cfg = load_config(config_path);
      SweepResult sr = run_sweep(cfg, key, values, jobs);
      std::cout << "sweep over " << key << ": " << sr.runs.size() << " runs, "
                << (sr.all_pass ? "all pass" : "FAILURES") << ", constants "
                << (sr.constants_stable ? "stable (x3)" : "NOT stable") << "\n";
      return (sr.all_pass && sr.constants_stable) ? 0 : 1;
    }
    if (report->parsed()) {
      write_report(run_dir, std::cout);
      return 0;
    }
    if (oracle->parsed()) return cmd_oracle(oracle_name, gamma, n, kappa);
  } catch (const ValidationError& e) {
    std::cerr << "invalid configuration:\n";
    for (const auto& v : e.violations()) std::cerr << "  - " << v << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
