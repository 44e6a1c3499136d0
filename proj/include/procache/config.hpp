#pragma once

// Experiment configuration: flat `key = value` text with `#` comments and
// comma-separated lists, plus PROCACHE_<KEY> environment overrides.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "procache/engine.hpp"
#include "procache/schemes.hpp"
#include "procache/workload.hpp"

namespace procache {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  Topology::Kind topology = Topology::Kind::FixedDelay;
  std::string topology_file;         // edge list; empty means synthesize
  std::size_t topology_nodes = 400;  // synthesized graph size
  std::uint64_t topology_seed = 1;
  std::size_t neighborhoods = 10;

  std::vector<SchemeKind> schemes{SchemeKind::EPC, SchemeKind::Naive, SchemeKind::Oracle, SchemeKind::Optimal};
  std::vector<Skewness> skews{Skewness::SKD70};
  double perturbation_sd = 0.05;

  double delay_unit = 20.0;  // absolute D_L
  double mid_ratio = 5.0;    // D_M / D_L
  double remote_ratio = 10.0;  // D_R / D_L, fixed-delay scenario

  std::vector<std::int64_t> total_cache{240};
  std::vector<double> mid_share{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> gamma{2.5};
  double initial_price = 0.0;
  DemandMeasure demand = DemandMeasure::ActiveSet;

  std::size_t mobiles = 160;
  std::size_t attachment_points = 8;
  double dwell_mean = 20.0;
  double smoothing = 1.0;
  double popularity = 0.0;
  bool estimate_probabilities = true;
  std::uint64_t switch_at = 0;  // 0 disables the mid-run profile switch
  Skewness switch_to = Skewness::SKD90;

  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::uint64_t handoffs = 10000;
  std::uint64_t warmup = 500;
  std::string output_dir = ".";

  /// Throws ConfigError.
  void validate() const;
};

/// Every key accepted by set_config_value, in documentation order.
const std::vector<std::string>& config_keys();

/// Assigns one key; throws ConfigError for unknown keys or bad values.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Parses `key = value` lines onto the defaults. Errors carry the line number.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Applies PROCACHE_<KEY> (upper case) for every known key that is set.
void apply_env_overrides(ExperimentConfig& config, const EnvLookup& lookup);
void apply_env_overrides(ExperimentConfig& config);

/// The config rendered back as `key = value` lines.
std::string render_config(const ExperimentConfig& config);

}  // namespace procache
