#pragma once

// Domain types shared by the placement schemes, the pricing loop, the
// workload generators and the simulator.

#include <cstdint>
#include <map>
#include <unordered_map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace procache {

using RequestId = std::uint64_t;
using MobileId = std::uint64_t;
using CacheId = std::uint32_t;
using Storage = std::int64_t;

/// Raised when requests, placements and caches do not fit together
/// (unknown cache ids, leaves without a parent where one is required, ...).
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One mobile's pending request for a data object.
struct ObjectRequest {
  RequestId id = 0;
  MobileId mobile = 0;
  Storage size = 1;
  /// Leaf cache id -> probability that the mobile attaches there next.
  std::map<CacheId, double> trans_probs;
  /// Additive popularity term; zero reproduces the pure mobility rule.
  double popularity = 0.0;
  std::uint64_t issued_at = 0;

  double probability(CacheId leaf) const;
  /// Effective decision weight q + r for one leaf.
  double weight(CacheId leaf) const { return probability(leaf) + popularity; }

  /// Throws std::invalid_argument unless probabilities sum to 1 (1e-9),
  /// size > 0 and popularity >= 0.
  void validate() const;
};

enum class CacheLevel { Leaf, Mid };

/// A leaf or mid-level cache with its committed contents and congestion price.
class CacheNode {
 public:
  CacheNode(CacheId id, CacheLevel level, Storage capacity, double gamma,
            std::optional<CacheId> parent = std::nullopt, double initial_price = 0.0);

  CacheId id() const { return id_; }
  CacheLevel level() const { return level_; }
  std::optional<CacheId> parent() const { return parent_; }
  Storage capacity() const { return capacity_; }
  Storage occupied() const { return occupied_; }
  Storage free_space() const { return capacity_ - occupied_; }
  double price() const { return price_; }
  double gamma() const { return gamma_; }
  const std::map<RequestId, Storage>& cached_set() const { return cached_; }

  bool holds(RequestId request) const { return cached_.count(request) != 0; }
  bool fits(Storage amount) const { return amount <= free_space(); }

  /// Commits `amount` units for `request`. Throws std::logic_error when the
  /// space is not available or the request is already held.
  void admit(RequestId request, Storage amount);
  /// Drops the request's copy; returns the number of units freed (0 if absent).
  Storage release(RequestId request);
  /// Drops everything; used by round-based allocators.
  void clear();

  /// Throws std::invalid_argument for negative prices.
  void set_price(double price);

 private:
  CacheId id_;
  CacheLevel level_;
  std::optional<CacheId> parent_;
  Storage capacity_;
  Storage occupied_ = 0;
  double price_;
  double gamma_;
  std::map<RequestId, Storage> cached_;
};

/// Per (request, cache) delay values, grouped by request.
class DelayOverrides {
 public:
  void set(RequestId request, CacheId cache, double delay);
  /// Drops every entry of the request.
  void erase(RequestId request) { by_request_.erase(request); }
  const double* find(RequestId request, CacheId cache) const;
  bool empty() const { return by_request_.empty(); }

 private:
  std::unordered_map<RequestId, std::vector<std::pair<CacheId, double>>> by_request_;
};

/// Delays that do not depend on object size, normalized so that the local
/// delay is typically 1. Remote and local delays may be overridden per
/// (request, cache) pair.
struct SizeIndependentDelays {
  double local = 1.0;
  double mid = 5.0;
  double remote = 10.0;
  DelayOverrides remote_overrides;
  DelayOverrides local_overrides;

  double remote_for(RequestId request, CacheId cache) const;
  double local_for(RequestId request, CacheId cache) const;
  /// Delay of a mid-level hit for a mobile that attaches at `cache`; the
  /// mobile never fetches from the mid level when the source is closer.
  double mid_for(RequestId request, CacheId cache) const;
};

/// Rate-based delays for partial caching.
struct SizeDependentRates {
  double rate_local = 1.0;
  double rate_remote = 1.0;
};

struct DelayModel {
  std::variant<SizeIndependentDelays, SizeDependentRates> kind;

  bool size_independent() const { return std::holds_alternative<SizeIndependentDelays>(kind); }
  const SizeIndependentDelays& delays() const;
  const SizeDependentRates& rates() const;

  /// Checks the ordering D_L < D_M < D_R (or D_L < D_R without a mid
  /// level) on the base delays, or R_R < R_L for rates.
  void validate(bool has_mid) const;
};

enum class UtilityShape { Linear, Sigmoid };

/// Utility of having `x` units of an object prefetched at one cache.
///
/// Both shapes work on the transfer delay D(x) = o/R_R - (1/R_R - 1/R_L) x.
/// Linear: U(x) = (R/q)(x - m) with R = 1/R_R - 1/R_L.
/// Sigmoid: U(x) = 1 / (1 + exp(k (D(x)/q - d0))).
/// Outside [m, M] the utility is held at its boundary value.
struct UtilitySpec {
  UtilityShape shape = UtilityShape::Linear;
  double min_amount = 0.0;
  double max_amount = 1.0;
  double object_size = 1.0;
  double rate_local = 1.0;
  double rate_remote = 1.0;
  double steepness = 1.0;
  double midpoint = 0.0;

  double slope() const { return 1.0 / rate_remote - 1.0 / rate_local; }
  void validate() const;
};

enum class Action { Full, Skip, Partial };

struct Decision {
  RequestId request = 0;
  CacheId cache = 0;
  Action action = Action::Skip;
  /// Prefetched amount; only meaningful for Partial.
  double amount = 0.0;

  bool cached() const { return action != Action::Skip; }
};

/// Parent relation of the caches that a placement may refer to. Leaves map
/// to their mid-level cache, or to nullopt in a flat structure.
struct Hierarchy {
  std::map<CacheId, std::optional<CacheId>> leaves;
  std::optional<CacheId> mid;

  static Hierarchy flat(CacheId leaf_count);
  static Hierarchy two_level(CacheId leaf_count, CacheId mid_id);
  bool knows(CacheId cache) const;
};

/// Expected delay sum_l q_l * delay(l) for one request, where delay(l) is the
/// local delay if the object sits at l, the mid delay if it sits only at l's
/// parent, and the remote delay otherwise. Under rate-based delays, Partial
/// and Full placements use the transfer delay of the cached amount.
double expected_delay(const ObjectRequest& request, const std::map<CacheId, Decision>& placements,
                      const Hierarchy& hierarchy, const DelayModel& model);

/// Relative delay reduction 1 - scheme/nocache.
double gain(double avg_delay_scheme, double avg_delay_nocache);

}  // namespace procache
