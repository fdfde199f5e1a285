#pragma once

#include <iosfwd>

#include "hartree_lab/config.hpp"
#include "hartree_lab/transforms.hpp"

namespace hartree {

struct CheckRecord {
  std::string id;
  std::string norm_desc;
  // exponent-envelope checks
  double predicted = std::numeric_limits<double>::quiet_NaN();
  double slope = std::numeric_limits<double>::quiet_NaN();
  double ci95 = std::numeric_limits<double>::quiet_NaN();
  double band_ratio = std::numeric_limits<double>::quiet_NaN();
  // tolerance checks
  double value = std::numeric_limits<double>::quiet_NaN();
  double threshold = std::numeric_limits<double>::quiet_NaN();
  bool pass = false;
  std::string detail;
  std::string csv; // relative path of the series file, if any
};

struct Calibrations {
  double transport_growth_C = 0.0; // v_a growth constant
  double gronwall_C = 0.0;         // linearized-envelope constant
  double uc_growth_C = 0.0;        // dressed-amplitude envelope constant
  double contraction_C = 0.0;      // smallness-relation constant
  double kappa_emp = 0.0;          // measured contraction coefficient
  double T_used = 0.0;
  double a0 = 0.0, a = 0.0, a1 = 0.0;
};

struct RunResult {
  std::filesystem::path dir;
  std::vector<CheckRecord> checks;
  Calibrations calib;
  bool all_pass = false;
  double wall_seconds = 0.0;
};

/// One full pipeline: profile -> fixed point -> dressing -> decomposition ->
/// registered checks; writes config copy, CSV series, summary.json (and
/// snapshots if requested) into cfg.output_dir.
RunResult run_experiment(const ExperimentConfig& cfg);

/// Render the human-readable table from a completed run directory.
void write_report(const std::filesystem::path& run_dir, std::ostream& os);

struct SweepResult {
  std::vector<RunResult> runs;
  bool all_pass = false;
  bool constants_stable = false; // calibrated constants within x3 across runs
};

/// Run one experiment per value of the dotted key; jobs > 1 runs them
/// concurrently (bounded by HARTREE_LAB_THREADS when jobs = 0).
SweepResult run_sweep(ExperimentConfig base, const std::string& dotted_key,
                      const std::vector<std::string>& values, int jobs = 1);

int thread_budget(); // HARTREE_LAB_THREADS, default 1

}  // namespace hartree
