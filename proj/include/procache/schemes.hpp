#pragma once

// Placement schemes: congestion-priced admission (flat and two-level),
// the naive and oracle baselines, the round-based optimum for equal-size
// objects, and knapsack reference solvers for variable sizes.

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "procache/model.hpp"

namespace procache {

enum class SchemeKind { EPC, Naive, Oracle, Optimal };

std::string to_string(SchemeKind kind);
/// Accepts "epc", "naive", "oracle", "optimal" (case-insensitive).
SchemeKind parse_scheme(std::string_view name);

/// Admission rule: weight * delay_saving >= size * price. Equality admits.
inline bool epc_rule(double weight, double delay_saving, Storage size, double price) {
  return weight * delay_saving >= static_cast<double>(size) * price;
}

/// Flat congestion-priced admission at one leaf: Full iff the rule holds and
/// the object fits; a full cache never evicts.
Decision epc_decide_flat(const ObjectRequest& request, const CacheNode& cache, const DelayModel& model);

/// Full whenever the object fits, regardless of probabilities and price.
Decision naive_decide(const ObjectRequest& request, const CacheNode& cache);

/// Prefetches only at the true destination leaf, if it has room at decision
/// time. When the destination is full and the leaf has a mid-level parent
/// with room, the object goes to the mid level instead. One decision per
/// cache in `caches`.
std::vector<Decision> oracle_decide(const ObjectRequest& request, CacheId destination,
                                    std::span<const CacheNode> caches);

/// Per cache, the requests admitted by one optimal allocation round.
using Allocation = std::map<CacheId, std::vector<RequestId>>;

/// Round-based optimum for equal-size objects. Each leaf admits the requests
/// with the largest w (D_R - D_L), up to capacity; ties go to the earliest
/// issue time, then the lowest id. A mid-level cache can take part only when
/// every leaf has zero capacity, in which case it ranks requests by
/// sum_l w_l (D_R - D_M). Throws std::invalid_argument for mixed sizes and
/// StructuralError when leaves and the mid level both have storage.
Allocation optimal_allocate_round(std::span<const ObjectRequest> requests, std::span<const CacheNode> caches,
                                  const DelayModel& model);

struct KnapsackItem {
  RequestId id = 0;
  Storage size = 1;
  double weight = 0.0;
};

struct KnapsackSolution {
  std::vector<RequestId> chosen;  // sorted ascending
  double value = 0.0;
  Storage used = 0;
};

/// Exhaustive 0/1 knapsack over at most 20 items. Among optimal subsets the
/// lexicographically smallest sorted id list wins.
KnapsackSolution knapsack_bruteforce(std::span<const KnapsackItem> items, Storage capacity);

/// Admission in decreasing weight/size order (ties by id), skipping items
/// that do not fit, compared against the best single fitting item; the
/// better of the two is returned. With unit sizes this is the exact top-B.
KnapsackSolution greedy_density_admit(std::span<const KnapsackItem> items, Storage capacity);

struct EpcConvergeOptions {
  double gamma = 0.5;
  int max_rounds = 20000;
  /// Fault injection for the verification harness: orders tied requests
  /// latest-first instead of earliest-first.
  bool reverse_tie_break = false;
};

/// Runs the price loop of every leaf over a fixed request set until the
/// admitted demand matches capacity (or the price settles on a tied
/// weight), then admits at the converged price. Flat structures only.
Allocation epc_converge_flat(std::span<const ObjectRequest> requests, std::span<const CacheNode> caches,
                             const DelayModel& model, const EpcConvergeOptions& options = {});

struct TwoLevelQuote {
  CacheId leaf = 0;
  double delay_if_mid_cached = 0.0;
  double delay_if_mid_not_cached = 0.0;
};

struct TwoLevelOutcome {
  std::vector<Decision> leaves;
  Decision mid;
  std::vector<TwoLevelQuote> quotes;
  /// Whether each leaf's rule (ignoring space) admitted in the subproblem
  /// the mid level selected; parallel to `leaves`.
  std::vector<bool> leaf_rule_admits;
  bool mid_rule_admits = false;
};

/// One request through the two-level protocol: every leaf solves the flat
/// rule against D_R and against D_M, reports the resulting expected delays,
/// the mid level caches iff the summed difference covers its price, and the
/// leaves commit the subproblem matching the mid's choice.
TwoLevelOutcome epc_two_level_round(const ObjectRequest& request, const CacheNode& mid,
                                    std::span<const CacheNode> leaves, const DelayModel& model);

/// The mid-level rule of epc_two_level_round alone, without allocating the
/// per-leaf outcome.
bool epc_mid_rule_admits(const ObjectRequest& request, const CacheNode& mid, std::span<const CacheNode> leaves,
                         const DelayModel& model);

}  // namespace procache
