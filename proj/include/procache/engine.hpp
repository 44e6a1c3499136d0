#pragma once

// Event-driven simulation of mobiles issuing prefetch requests, handing off
// and being replaced, under one placement scheme.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "procache/model.hpp"
#include "procache/schemes.hpp"
#include "procache/workload.hpp"

namespace procache {

/// Frequency estimate of transition probabilities per mobility class, with
/// additive smoothing: (count_l + alpha) / (sum + n alpha).
class ProbEstimator {
 public:
  ProbEstimator(std::size_t classes, std::size_t destinations, double smoothing);

  void observe(std::size_t cls, std::size_t destination);
  std::vector<double> estimate(std::size_t cls) const;
  std::uint64_t count(std::size_t cls, std::size_t destination) const;
  std::uint64_t observations(std::size_t cls) const;

 private:
  std::size_t destinations_;
  double smoothing_;
  std::vector<std::vector<std::uint64_t>> counts_;
  std::vector<std::uint64_t> totals_;
};

struct ProfileSwitch {
  std::uint64_t at_handoff = 5000;
  Skewness to = Skewness::SKD90;
};

/// What the congestion price compares against capacity.
enum class DemandMeasure {
  /// Committed storage plus every uncached active request the rule would
  /// admit at the current price.
  ActiveSet,
  /// Committed storage plus the current request if the rule admits it.
  Arrival,
};

struct SimConfig {
  Topology::Kind topology_kind = Topology::Kind::FixedDelay;
  /// Required for the Internet scenario; neighborhoods must be formed.
  const Topology* topology = nullptr;

  std::size_t mobiles = 160;  // per neighborhood
  std::size_t attachment_points = 8;
  Skewness skew = Skewness::SKD70;
  double perturbation_sd = 0.05;
  std::optional<ProfileSwitch> profile_switch;

  /// Absolute delays. Admission depends on their ratios only at a settled
  /// price; the price moves in these units, so the scale sets how strongly a
  /// given gamma reacts.
  double delay_local = 20.0;
  double delay_mid = 100.0;
  double delay_remote = 200.0;  // fixed-delay scenario only

  Storage total_cache = 240;  // leaf + mid, per neighborhood
  double mid_share = 0.0;     // MC / TC

  double gamma = 2.5;
  double initial_price = 0.0;
  DemandMeasure demand = DemandMeasure::ActiveSet;
  double dwell_mean = 20.0;
  double smoothing = 1.0;
  double popularity = 0.0;
  /// Schemes that use probabilities see class estimates when true and each
  /// mobile's true vector when false.
  bool estimate_probabilities = true;

  std::uint64_t handoffs = 10000;  // per neighborhood
  std::uint64_t warmup = 500;

  Storage mid_capacity() const;
  /// Leaf capacities: the leaf share split evenly, remainder to the lowest ids.
  std::vector<Storage> leaf_capacities() const;
  std::size_t neighborhood_count() const;
  /// Throws std::invalid_argument on inconsistent settings.
  void validate(SchemeKind scheme) const;
};

struct SimEvent {
  enum class Kind { Handoff = 0, NewRequest = 1, PriceTick = 2 };

  double time = 0.0;
  Kind kind = Kind::NewRequest;
  std::uint64_t seq = 0;
  MobileId mobile = 0;
  CacheId cache = 0;
};

/// Strict processing order: time, then Handoff < NewRequest < PriceTick,
/// then insertion sequence.
bool event_before(const SimEvent& a, const SimEvent& b);

struct RunMetrics {
  std::uint64_t handoffs_completed = 0;
  std::uint64_t measured_handoffs = 0;  // after warmup
  double scheme_delay = 0.0;            // after warmup
  double nocache_delay = 0.0;           // after warmup
  std::uint64_t leaf_hits = 0;
  std::uint64_t mid_hits = 0;
  /// Delay sums per handoff index, added over neighborhoods (and over runs
  /// when merged). Includes the warmup.
  std::vector<double> delay_by_handoff;
  std::vector<double> nocache_by_handoff;
  /// Time-averaged occupancy / capacity after warmup, one entry per cache
  /// (leaves then mid, per neighborhood); 0 for zero-capacity caches.
  std::vector<double> utilization;
  std::vector<double> final_prices;

  double gain() const;
  double avg_delay() const;
  /// Adds another run's per-handoff series and totals into this one.
  void merge(const RunMetrics& other);
};

/// Observer invoked after every processed event with the caches of the
/// neighborhood and the number of active mobiles there.
using EventObserver = std::function<void(const SimEvent&, std::span<const CacheNode>, std::size_t active)>;

RunMetrics run(const SimConfig& config, SchemeKind scheme, std::uint64_t seed, const EventObserver& observer = {});

struct TransientSeries {
  std::size_t window = 0;
  /// gain[i] covers handoffs [i, i + window).
  std::vector<double> gain;
};

/// Windowed gain over consecutive handoffs. Throws if the window exceeds
/// the run.
TransientSeries transient_gain_series(const RunMetrics& metrics, std::size_t window);

struct Recovery {
  double steady_state = 0.0;
  /// Handoffs after `from` until the windowed gain first reaches 95% of the
  /// steady state; nullopt if it never does.
  std::optional<std::size_t> handoffs;
};

/// Steady state is the mean windowed gain over the last `tail` windows.
/// Windows are indexed by their last handoff.
Recovery recovery_after(const TransientSeries& series, std::size_t from, std::size_t tail, double fraction = 0.95);

}  // namespace procache
