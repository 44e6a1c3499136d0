#pragma once

// Randomized oracle suites behind the `verify` subcommand: brute-force
// knapsack, converged-price vs round-based optimum on flat caches, the
// partial-caching fixed point vs grid search, and closed-form vs numeric
// objectives.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "procache/partial.hpp"

namespace procache {

struct PropertyResult {
  std::string suite;
  std::string property;
  bool pass = true;
  std::size_t cases = 0;
  /// JSON text describing the first failing case; empty when passing.
  std::string counterexample;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  /// Mutation switch: converged admission orders tied requests latest-first.
  bool inject_tie_break_bug = false;
  std::size_t knapsack_instances = 100;
  std::size_t flat_instances = 50;
  std::size_t partial_instances = 20;
  std::size_t fairness_candidates = 50;
};

const std::vector<std::string>& verify_suites();

/// Throws std::invalid_argument for an unknown suite name.
std::vector<PropertyResult> run_suite(const std::string& suite, const VerifyOptions& options = {});

/// One JSON object per line.
std::string to_json_line(const PropertyResult& result);

struct GridOptimum {
  PartialAllocation allocation;
  double objective = 0.0;
};

/// Maximizes sum_s V_s(x_s) over x_s in [m_s, M_s], sum x_s <= capacity, by
/// grid search with local refinement (up to 3 requests). The objective is
/// concave, so zooming in on the best grid cell does not lose the optimum.
GridOptimum partial_grid_search(std::span<const PartialRequest> requests, double capacity,
                                std::size_t points = 40, int refinements = 8);

/// Price loop with a step small enough for the instance to settle.
PartialEquilibrium converge_partial_auto(std::span<const PartialRequest> requests, double capacity);

}  // namespace procache
