#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "reflest/grid.hpp"
#include "reflest/scenario.hpp"

namespace reflest::config {

/// Invalid or missing configuration content. What() carries a line or field
/// diagnostic; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One parsed section of the plain-text config format:
///
///   # comment to end of line
///   experiment viscosity-sweep       key then value, split at whitespace
///   eps_ladder 0.4 0.2 0.1           list values stay on one line
///   grid {                           nested section
///     xmax 8
///     nx 400
///   }
///
/// Keys are unique within a section. Getters throw ConfigError naming the
/// missing or malformed field.
struct Node {
  std::map<std::string, std::string> values;
  std::map<std::string, Node> sections;
  std::map<std::string, int> value_lines;

  bool has(const std::string& key) const;
  bool has_section(const std::string& key) const;
  const Node& section(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_real(const std::string& key) const;
  double get_real(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::vector<double> get_reals(const std::string& key) const;
  std::vector<double> get_reals(const std::string& key,
                                const std::vector<double>& fallback) const;
};

/// Parses config text. `source` labels diagnostics ("file.cfg line 7: ...").
Node parse(const std::string& text, const std::string& source);

/// Reads and parses a config file; unreadable paths are a ConfigError.
Node parse_file(const std::string& path);

/// A validated experiment request.
struct ExperimentConfig {
  std::string experiment;
  std::string scenario_label;  // preset name or rendered inline spec
  ProblemSpec scenario;
  GridSpec grid;
  std::vector<double> kappa_ladder;
  std::vector<double> eps_ladder;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir;
  Node root;  // full tree, for experiment-specific options
};

const std::vector<std::string>& experiment_names();

/// Builds and validates an ExperimentConfig from a parsed tree:
///   - `experiment` must name a known experiment ("missing field: experiment"
///     when absent, as for an empty file);
///   - `scenario` is a preset name, or a `scenario { family ... }` section
///     (family linear-quadratic takes a, c, m, sigma0, x0 and optional
///     plateau); each experiment has a documented default;
///   - `grid { xmax nx T nt }` keys override per-experiment defaults;
///   - ladders must be strictly monotone;
///   - stochastic experiments (mortensen, filtering) require a seed.
ExperimentConfig load(const Node& root);

ExperimentConfig load_file(const std::string& path);

}  // namespace reflest::config
