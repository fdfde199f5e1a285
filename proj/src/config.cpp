#include "hartree_lab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hartree_lab/estimates.hpp"

namespace hartree {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct KV {
  std::map<std::string, std::string> values; // "section.key" -> value
  std::map<std::string, int> lines;
};

KV parse_kv(const std::string& text, const std::string& origin) {
  KV kv;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw DomainError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DomainError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw DomainError(origin + ":" + std::to_string(lineno) + ": empty key");
    kv.values[section + "." + key] = val;
    kv.lines[section + "." + key] = lineno;
  }
  return kv;
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw DomainError("value '" + v + "' for " + key + " is not a number");
  }
}

}  // namespace

ModelParams ExperimentConfig::model_params() const {
  return ModelParams::validated(gamma, rho, kappa, dimension, plus_epsilon, level == 0);
}

GridSpec ExperimentConfig::grid_spec() const { return GridSpec::make(dimension, points, length); }

GradedMesh ExperimentConfig::profile_mesh() const {
  const double p = grading > 0.0 ? grading : GradedMesh::auto_power(model_params());
  return GradedMesh::make(1.0, nodes, p);
}

SolverConfig ExperimentConfig::solver_config() const {
  SolverConfig sc;
  sc.T = tfinal;
  sc.fixed_point_tol = fixed_point_tol;
  sc.max_iterations = max_iterations;
  sc.rho_prime = rho_prime;
  return sc;
}

SpectralField ExperimentConfig::make_initial_data() const {
  const GridSpec g = grid_spec();
  const ModelParams p = model_params();
  SpectralField u(g);
  if (family == "gaussian") {
    const int N = g.points;
    std::vector<int> idx(g.rank, 0);
    for (std::size_t f = 0; f < g.size(); ++f) {
      double r2 = 0.0;
      for (int d = 0; d < g.rank; ++d) {
        const double x = g.coord(idx[d]);
        r2 += x * x;
      }
      u.values()[f] = std::exp(-0.5 * r2 / (width * width));
      for (int d = g.rank - 1; d >= 0; --d) {
        if (++idx[d] < N) break;
        idx[d] = 0;
      }
    }
  } else if (family == "band_limited_random") {
    u = random_band_limited_field(g, seed, 4.0, 2.0);
  } else if (family == "file") {
    throw DomainError("family=file initial data is resolved by the runner, not here");
  } else {
    throw ValidationError({"initial_data.family must be gaussian | band_limited_random | file"});
  }
  const double nrm = sobolev_norm(u, NormSpec::sobolev(p.rho));
  const double scale = amplitude_norm / nrm;
  for (auto& v : u.values()) v *= scale;
  return u;
}

void ExperimentConfig::validate() const {
  std::vector<std::string> bad;
  auto absorb = [&](auto&& fn) {
    try {
      fn();
    } catch (const ValidationError& e) {
      for (const auto& v : e.violations()) bad.push_back(v);
    } catch (const std::exception& e) {
      bad.push_back(e.what());
    }
  };
  absorb([&] { (void)model_params(); });
  absorb([&] { (void)grid_spec(); });
  absorb([&] { (void)profile_mesh(); });
  if (level != 0 && level != 1) bad.push_back("asymptotics.level must be 0 or 1");
  if (!(tfinal == 0.0 || (tfinal > 0.0 && tfinal <= 1.0)))
    bad.push_back("solver.tfinal must be 'auto' or lie in (0, 1]");
  if (!(fixed_point_tol > 0.0)) bad.push_back("solver.fixed_point_tol must be positive");
  if (max_iterations < 1) bad.push_back("solver.max_iterations must be >= 1");
  if (rho_prime != 0.0 && dimension >= 2) {
    if (!(rho_prime > 0.5 && rho_prime < 0.5 * dimension))
      bad.push_back("solver.rho_prime must satisfy 1/2 < rho' < n/2, got " +
                    std::to_string(rho_prime));
  }
  if (!(amplitude_norm > 0.0)) bad.push_back("initial_data.amplitude_norm must be positive");
  if (!(width > 0.0)) bad.push_back("initial_data.width must be positive");
  if (family != "gaussian" && family != "band_limited_random" && family != "file")
    bad.push_back("initial_data.family must be gaussian | band_limited_random | file");
  if (family == "file" && file.empty()) bad.push_back("initial_data.file path required");
  if (save_snapshots != "none" && save_snapshots != "profile" && save_snapshots != "all")
    bad.push_back("output.save_snapshots must be none | profile | all");
  if (!(band_limit > 1.0)) bad.push_back("checks.band_limit must exceed 1");
  if (!(slope_tol >= 0.0)) bad.push_back("checks.slope_tol must be nonnegative");
  if (!(window_lo > 0.0 && window_lo < window_hi && window_hi <= 1.0))
    bad.push_back("checks.window must satisfy 0 < lo < hi <= 1");
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream os;
  os.precision(17);
  os << "[model]\n";
  os << "gamma = " << gamma << "\n";
  os << "rho = " << rho << "\n";
  os << "kappa = " << kappa << "\n";
  os << "dimension = " << dimension << "\n";
  os << "plus_epsilon = " << plus_epsilon << "\n\n";
  os << "[grid]\n";
  os << "points = " << points << "\n";
  os << "length = " << length << "\n\n";
  os << "[mesh]\n";
  os << "nodes = " << nodes << "\n";
  os << "grading = " << (grading > 0.0 ? std::to_string(grading) : std::string("auto")) << "\n\n";
  os << "[solver]\n";
  os << "tfinal = " << (tfinal > 0.0 ? std::to_string(tfinal) : std::string("auto")) << "\n";
  os << "fixed_point_tol = " << fixed_point_tol << "\n";
  os << "max_iterations = " << max_iterations << "\n";
  os << "rho_prime = " << (rho_prime > 0.0 ? std::to_string(rho_prime) : std::string("auto"))
     << "\n\n";
  os << "[initial_data]\n";
  os << "family = " << family << "\n";
  os << "amplitude_norm = " << amplitude_norm << "\n";
  os << "width = " << width << "\n";
  os << "seed = " << seed << "\n";
  if (!file.empty()) os << "file = " << file << "\n";
  os << "\n[asymptotics]\n";
  os << "level = " << level << "\n\n";
  os << "[checks]\n";
  if (checks.empty()) {
    os << "enable = all\n";
  } else {
    os << "enable = ";
    for (std::size_t i = 0; i < checks.size(); ++i) os << (i ? "," : "") << checks[i];
    os << "\n";
  }
  os << "band_limit = " << band_limit << "\n";
  os << "slope_tol = " << slope_tol << "\n";
  os << "window_lo = " << window_lo << "\n";
  os << "window_hi = " << window_hi << "\n\n";
  os << "[output]\n";
  os << "dir = " << output_dir << "\n";
  os << "save_snapshots = " << save_snapshots << "\n";
  return os.str();
}

void apply_override(ExperimentConfig& cfg, const std::string& dotted_key, const std::string& value) {
  auto num = [&] { return parse_double(value, dotted_key); };
  auto is_auto = [&] { return value == "auto" || value == "0"; };
  if (dotted_key == "model.gamma") cfg.gamma = num();
  else if (dotted_key == "model.rho") cfg.rho = num();
  else if (dotted_key == "model.kappa") cfg.kappa = num();
  else if (dotted_key == "model.dimension") cfg.dimension = static_cast<int>(num());
  else if (dotted_key == "model.plus_epsilon") cfg.plus_epsilon = num();
  else if (dotted_key == "grid.points") cfg.points = static_cast<int>(num());
  else if (dotted_key == "grid.length") cfg.length = num();
  else if (dotted_key == "mesh.nodes") cfg.nodes = static_cast<int>(num());
  else if (dotted_key == "mesh.grading") cfg.grading = is_auto() ? 0.0 : num();
  else if (dotted_key == "solver.tfinal") cfg.tfinal = is_auto() ? 0.0 : num();
  else if (dotted_key == "solver.fixed_point_tol") cfg.fixed_point_tol = num();
  else if (dotted_key == "solver.max_iterations") cfg.max_iterations = static_cast<int>(num());
  else if (dotted_key == "solver.rho_prime") cfg.rho_prime = is_auto() ? 0.0 : num();
  else if (dotted_key == "initial_data.family") cfg.family = value;
  else if (dotted_key == "initial_data.amplitude_norm") cfg.amplitude_norm = num();
  else if (dotted_key == "initial_data.width") cfg.width = num();
  else if (dotted_key == "initial_data.seed") cfg.seed = static_cast<std::uint64_t>(num());
  else if (dotted_key == "initial_data.file") cfg.file = value;
  else if (dotted_key == "asymptotics.level") cfg.level = static_cast<int>(num());
  else if (dotted_key == "checks.enable") {
    cfg.checks.clear();
    if (value != "all") {
      std::istringstream is(value);
      std::string item;
      while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) cfg.checks.push_back(item);
      }
    }
  } else if (dotted_key == "checks.band_limit") cfg.band_limit = num();
  else if (dotted_key == "checks.slope_tol") cfg.slope_tol = num();
  else if (dotted_key == "checks.window_lo") cfg.window_lo = num();
  else if (dotted_key == "checks.window_hi") cfg.window_hi = num();
  else if (dotted_key == "output.dir") cfg.output_dir = value;
  else if (dotted_key == "output.save_snapshots") cfg.save_snapshots = value;
  else throw DomainError("unknown config key: " + dotted_key);
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  KV kv = parse_kv(text, origin);
  ExperimentConfig cfg;
  for (const auto& [key, val] : kv.values) {
    try {
      apply_override(cfg, key, val);
    } catch (const DomainError& e) {
      throw DomainError(origin + ":" + std::to_string(kv.lines.at(key)) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DomainError("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.string());
}

}  // namespace hartree
