#pragma once

// Sweeps over (scheme, skew, MC/TC, TC, gamma, seed), aggregation across
// seeds with t-based confidence intervals, and CSV emission.

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "procache/config.hpp"
#include "procache/engine.hpp"

namespace procache {

struct ResultRow {
  std::string scheme;
  std::string skew;
  double mc_over_tc = 0.0;
  std::int64_t tc = 0;
  double gamma = 0.0;
  std::optional<std::uint64_t> seed;  // nullopt marks the mean over seeds
  double gain = 0.0;
  double avg_delay = 0.0;
  std::optional<double> ci_halfwidth;

  bool is_mean() const { return !seed.has_value(); }
};

/// Sort order of emitted tables: every key column, seeds ascending with the
/// mean row last.
bool row_before(const ResultRow& a, const ResultRow& b);

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;                  // sample standard deviation
  std::optional<double> ci_halfwidth;   // absent for a single sample
};

/// Mean, sample deviation and the two-sided t-interval half-width.
Summary aggregate(const std::vector<double>& values, double confidence = 0.95);

/// Builds the topology an Internet-scenario config asks for (loaded or
/// synthesized, with neighborhoods formed). Throws ConfigError.
std::shared_ptr<Topology> build_topology(const ExperimentConfig& config);

/// Simulation settings for one sweep point.
SimConfig sim_config_for(const ExperimentConfig& config, Skewness skew, double mid_share, std::int64_t total_cache,
                         double gamma, const Topology* topology);

/// Whether a scheme can run at a sweep point (the optimum needs a flat
/// storage level).
bool scheme_applicable(SchemeKind scheme, double mid_share);

using Progress = std::function<void(const ResultRow&)>;

/// Per-seed rows plus one mean row per point. Points where a scheme is not
/// applicable are skipped.
std::vector<ResultRow> sweep(const ExperimentConfig& config, const Progress& progress = {});

/// Single (point, seed) run as a table row.
ResultRow run_point(const ExperimentConfig& config, SchemeKind scheme, Skewness skew, double mid_share,
                    std::int64_t total_cache, double gamma, std::uint64_t seed, const Topology* topology);

/// Adds mean rows (with CI) for every point that has per-seed rows.
std::vector<ResultRow> with_means(std::vector<ResultRow> rows);

inline constexpr const char* kCsvHeader = "scheme,skew,mc_over_tc,tc,gamma,seed,gain,avg_delay,ci_halfwidth";

/// Header plus rows in row_before order, floats at 6 significant digits.
void emit_csv(std::vector<ResultRow> rows, std::ostream& out);
/// Throws std::runtime_error naming the path on I/O failure.
void write_csv(const std::vector<ResultRow>& rows, const std::string& path);
/// Inverse of emit_csv. Throws std::invalid_argument on malformed input.
std::vector<ResultRow> parse_csv(std::istream& in);

}  // namespace procache
