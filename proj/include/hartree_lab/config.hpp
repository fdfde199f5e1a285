#pragma once

#include <filesystem>

#include "hartree_lab/cauchy.hpp"

// Flat, typed, sectioned key=value configuration (diff-able, seedable).

namespace hartree {

struct ExperimentConfig {
  // [model]
  double gamma = 0.45;
  double rho = 0.95;
  double kappa = 1.0;
  int dimension = 2;
  double plus_epsilon = 0.05;
  // [grid]
  int points = 128;
  double length = 20.0;
  // [mesh]
  int nodes = 512;
  double grading = 0.0; // 0 = auto (ceil(1/lambda_1) capped at 6)
  // [solver]
  double tfinal = 0.0;  // 0 = auto from the smallness relation
  double fixed_point_tol = 1e-8;
  int max_iterations = 12;
  double rho_prime = 0.0; // 0 = rho
  // [initial_data]
  std::string family = "gaussian"; // gaussian | band_limited_random | file
  double amplitude_norm = 0.5;     // target H^rho size a_0
  double width = 1.0;
  std::uint64_t seed = 1234;
  std::string file; // profile snapshot path for family = file
  // [asymptotics]
  int level = 1;
  // [checks]
  std::vector<std::string> checks; // empty = all
  double band_limit = 10.0;
  double slope_tol = 0.05;
  double window_lo = 1e-3;
  double window_hi = 1e-1;
  // [output]
  std::string output_dir = "runs/run";
  std::string save_snapshots = "none"; // none | profile | all

  ModelParams model_params() const;
  GridSpec grid_spec() const;
  GradedMesh profile_mesh() const;
  SolverConfig solver_config() const;
  SpectralField make_initial_data() const;

  /// canonical serialized form (parseable by load_config).
  std::string serialize() const;
  /// full validation across module preconditions; throws ValidationError.
  void validate() const;
};

/// Parse and validate; parse errors carry line numbers, validation errors
/// name every violated condition.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<memory>");

/// Apply a "section.key=value" override (used by sweep and CLI flags).
void apply_override(ExperimentConfig& cfg, const std::string& dotted_key, const std::string& value);

}  // namespace hartree
