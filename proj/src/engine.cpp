#include "procache/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "procache/pricing.hpp"

namespace procache {

ProbEstimator::ProbEstimator(std::size_t classes, std::size_t destinations, double smoothing)
    : destinations_(destinations),
      smoothing_(smoothing),
      counts_(classes, std::vector<std::uint64_t>(destinations, 0)),
      totals_(classes, 0) {
  if (destinations == 0) throw std::invalid_argument("estimator needs at least one destination");
  if (smoothing < 0.0) throw std::invalid_argument("smoothing must be nonnegative");
}

void ProbEstimator::observe(std::size_t cls, std::size_t destination) {
  ++counts_.at(cls).at(destination);
  ++totals_[cls];
}

std::vector<double> ProbEstimator::estimate(std::size_t cls) const {
  const auto& c = counts_.at(cls);
  const double denom = static_cast<double>(totals_[cls]) + smoothing_ * static_cast<double>(destinations_);
  std::vector<double> out(destinations_);
  if (denom <= 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(destinations_));
    return out;
  }
  for (std::size_t d = 0; d < destinations_; ++d) out[d] = (static_cast<double>(c[d]) + smoothing_) / denom;
  return out;
}

std::uint64_t ProbEstimator::count(std::size_t cls, std::size_t destination) const {
  return counts_.at(cls).at(destination);
}

std::uint64_t ProbEstimator::observations(std::size_t cls) const { return totals_.at(cls); }

Storage SimConfig::mid_capacity() const {
  return static_cast<Storage>(std::llround(static_cast<double>(total_cache) * mid_share));
}

std::vector<Storage> SimConfig::leaf_capacities() const {
  const Storage leaf_total = total_cache - mid_capacity();
  const auto n = static_cast<Storage>(attachment_points);
  std::vector<Storage> caps(attachment_points, leaf_total / n);
  for (Storage i = 0; i < leaf_total % n; ++i) ++caps[static_cast<std::size_t>(i)];
  return caps;
}

std::size_t SimConfig::neighborhood_count() const {
  if (topology_kind == Topology::Kind::FixedDelay) return 1;
  return topology == nullptr ? 0 : topology->neighborhoods.size();
}

void SimConfig::validate(SchemeKind scheme) const {
  if (mobiles == 0 || attachment_points == 0) throw std::invalid_argument("need mobiles and attachment points");
  if (skew_vector(skew).size() != attachment_points)
    throw std::invalid_argument("skew sets are defined over 8 attachment points");
  if (total_cache < 0) throw std::invalid_argument("total cache must be nonnegative");
  if (!(mid_share >= 0.0 && mid_share <= 1.0)) throw std::invalid_argument("MC/TC must lie in [0, 1]");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(initial_price >= 0.0)) throw std::invalid_argument("initial price must be nonnegative");
  if (!(dwell_mean > 0.0)) throw std::invalid_argument("dwell mean must be positive");
  if (estimate_probabilities && !(smoothing > 0.0)) throw std::invalid_argument("smoothing must be positive");
  if (!(perturbation_sd >= 0.0)) throw std::invalid_argument("perturbation sd must be nonnegative");
  if (!(popularity >= 0.0)) throw std::invalid_argument("popularity must be nonnegative");
  if (handoffs <= warmup) throw std::invalid_argument("run length must exceed the warmup");
  if (!(delay_local > 0.0 && delay_local < delay_mid)) throw std::invalid_argument("delays must satisfy D_L < D_M");
  if (topology_kind == Topology::Kind::FixedDelay) {
    if (!(delay_mid < delay_remote)) throw std::invalid_argument("delays must satisfy D_M < D_R");
  } else {
    if (topology == nullptr || topology->neighborhoods.empty())
      throw std::invalid_argument("Internet scenario needs a topology with neighborhoods");
    for (const auto& hood : topology->neighborhoods)
      if (hood.size() != attachment_points) throw std::invalid_argument("neighborhood size must match attachment points");
  }
  if (scheme == SchemeKind::Optimal && mid_capacity() > 0) {
    const auto caps = leaf_capacities();
    if (std::any_of(caps.begin(), caps.end(), [](Storage c) { return c > 0; }))
      throw std::invalid_argument("the optimal scheme needs a flat structure (MC/TC = 0 or 1)");
  }
}

bool event_before(const SimEvent& a, const SimEvent& b) {
  if (a.time != b.time) return a.time < b.time;
  if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  return a.seq < b.seq;
}

double RunMetrics::gain() const {
  if (nocache_delay <= 0.0) return 0.0;
  return procache::gain(scheme_delay, nocache_delay);
}

double RunMetrics::avg_delay() const {
  return measured_handoffs == 0 ? 0.0 : scheme_delay / static_cast<double>(measured_handoffs);
}

void RunMetrics::merge(const RunMetrics& other) {
  handoffs_completed += other.handoffs_completed;
  measured_handoffs += other.measured_handoffs;
  scheme_delay += other.scheme_delay;
  nocache_delay += other.nocache_delay;
  leaf_hits += other.leaf_hits;
  mid_hits += other.mid_hits;
  if (delay_by_handoff.size() < other.delay_by_handoff.size()) {
    delay_by_handoff.resize(other.delay_by_handoff.size(), 0.0);
    nocache_by_handoff.resize(other.nocache_by_handoff.size(), 0.0);
  }
  for (std::size_t i = 0; i < other.delay_by_handoff.size(); ++i) {
    delay_by_handoff[i] += other.delay_by_handoff[i];
    nocache_by_handoff[i] += other.nocache_by_handoff[i];
  }
  utilization.insert(utilization.end(), other.utilization.begin(), other.utilization.end());
  final_prices.insert(final_prices.end(), other.final_prices.begin(), other.final_prices.end());
}

namespace {

struct Mobile {
  std::size_t cls = 0;
  std::size_t destination = 0;
  std::vector<double> probs;
  ObjectRequest request;
};

struct EventLater {
  bool operator()(const SimEvent& a, const SimEvent& b) const { return event_before(b, a); }
};

class NeighborhoodSim {
 public:
  NeighborhoodSim(const SimConfig& config, SchemeKind scheme, std::size_t hood, std::uint64_t seed,
                  RunMetrics& metrics, const EventObserver& observer)
      : cfg_(config),
        scheme_(scheme),
        hood_(hood),
        seed_(seed),
        metrics_(metrics),
        observer_(observer),
        estimator_(config.attachment_points, config.attachment_points, config.smoothing) {
    const auto caps = cfg_.leaf_capacities();
    const Storage mid_cap = cfg_.mid_capacity();
    has_mid_ = mid_cap > 0;
    const auto n = static_cast<CacheId>(cfg_.attachment_points);
    for (CacheId l = 0; l < n; ++l)
      caches_.emplace_back(l, CacheLevel::Leaf, caps[l], cfg_.gamma,
                           has_mid_ ? std::optional<CacheId>(n) : std::nullopt, cfg_.initial_price);
    if (has_mid_) caches_.emplace_back(n, CacheLevel::Mid, mid_cap, cfg_.gamma, std::nullopt, cfg_.initial_price);

    SizeIndependentDelays d;
    d.local = cfg_.delay_local;
    d.mid = cfg_.delay_mid;
    d.remote = cfg_.delay_remote;
    model_.kind = d;
    occupancy_time_.assign(caches_.size(), 0.0);
  }

  void run() {
    for (std::size_t i = 0; i < cfg_.mobiles; ++i) push(0.0, SimEvent::Kind::NewRequest, next_mobile_++);
    while (!queue_.empty() && handoffs_ < cfg_.handoffs) {
      const SimEvent ev = queue_.top();
      queue_.pop();
      if (handoffs_ >= cfg_.warmup) {
        const double dt = ev.time - last_time_;
        for (std::size_t c = 0; c < caches_.size(); ++c)
          occupancy_time_[c] += dt * static_cast<double>(caches_[c].occupied());
        measured_time_ += dt;
      }
      last_time_ = ev.time;
      switch (ev.kind) {
        case SimEvent::Kind::NewRequest: on_request(ev); break;
        case SimEvent::Kind::Handoff: on_handoff(ev); break;
        case SimEvent::Kind::PriceTick: {
          auto& c = caches_.at(ev.cache);
          reprice(c, cfg_.demand == DemandMeasure::ActiveSet ? active_demand(c) : static_cast<double>(c.occupied()));
          break;
        }
      }
      check_conservation();
      if (observer_) observer_(ev, caches_, mobiles_.size());
    }
    for (std::size_t c = 0; c < caches_.size(); ++c) {
      const double cap = static_cast<double>(caches_[c].capacity());
      metrics_.utilization.push_back(cap > 0.0 && measured_time_ > 0.0 ? occupancy_time_[c] / (cap * measured_time_)
                                                                        : 0.0);
      metrics_.final_prices.push_back(caches_[c].price());
    }
  }

 private:
  void push(double time, SimEvent::Kind kind, MobileId mobile, CacheId cache = 0) {
    queue_.push({time, kind, seq_++, mobile, cache});
  }

  auto& delays() { return std::get<SizeIndependentDelays>(model_.kind); }

  Skewness current_skew() const {
    if (cfg_.profile_switch && handoffs_ >= cfg_.profile_switch->at_handoff) return cfg_.profile_switch->to;
    return cfg_.skew;
  }

  void on_request(const SimEvent& ev) {
    const MobileId id = ev.mobile;
    Rng rng(derive_seed(seed_, id));
    const std::size_t n = cfg_.attachment_points;

    Mobile m;
    m.cls = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    MobilityProfile profile{skew_vector(current_skew()), m.cls, cfg_.perturbation_sd};
    m.probs = profile.realize(rng);
    m.destination = sample_destination(m.probs, rng);

    auto& req = m.request;
    req.id = id;
    req.mobile = id;
    req.size = 1;
    req.popularity = cfg_.popularity;
    req.issued_at = ev.seq;
    const auto q = cfg_.estimate_probabilities ? estimator_.estimate(m.cls) : m.probs;
    for (std::size_t l = 0; l < n; ++l) req.trans_probs[static_cast<CacheId>(l)] = q[l];

    if (cfg_.topology_kind == Topology::Kind::InternetScaled) {
      const auto& topo = *cfg_.topology;
      const auto& sources = topo.sources;
      const NodeId source = sources[std::uniform_int_distribution<std::size_t>(0, sources.size() - 1)(rng)];
      const auto& hood = topo.neighborhoods[hood_];
      for (std::size_t l = 0; l < n; ++l) {
        const int hops = topo.hops_from_member(hood[l], source);
        delays().remote_overrides.set(id, static_cast<CacheId>(l), cfg_.delay_local * remote_delay_ratio(hops));
      }
    }

    const double dwell = std::exponential_distribution<double>(1.0 / cfg_.dwell_mean)(rng);
    auto [it, inserted] = mobiles_.emplace(id, std::move(m));
    (void)inserted;
    decide(it->second);
    push(ev.time + dwell, SimEvent::Kind::Handoff, id);
  }

  void decide(const Mobile& m) {
    const auto& req = m.request;
    const std::size_t n = cfg_.attachment_points;
    std::span<CacheNode> leaves(caches_.data(), n);
    switch (scheme_) {
      case SchemeKind::Naive:
        for (auto& c : caches_)
          if (naive_decide(req, c).cached()) c.admit(req.id, req.size);
        break;
      case SchemeKind::Oracle:
        for (const auto& d : oracle_decide(req, static_cast<CacheId>(m.destination), caches_))
          if (d.cached()) caches_[d.cache].admit(req.id, req.size);
        break;
      case SchemeKind::Optimal: reallocate(); break;
      case SchemeKind::EPC:
        if (!has_mid_) {
          for (auto& leaf : leaves) {
            const auto d = epc_decide_flat(req, leaf, model_);
            const double occupied = static_cast<double>(leaf.occupied());
            if (d.cached()) leaf.admit(req.id, req.size);
            if (cfg_.demand == DemandMeasure::Arrival) {
              const auto& dl = model_.delays();
              const bool rule = epc_rule(req.weight(leaf.id()), dl.remote_for(req.id, leaf.id()) - dl.local_for(req.id, leaf.id()),
                                         req.size, leaf.price());
              reprice(leaf, occupied + (rule ? static_cast<double>(req.size) : 0.0));
            }
          }
        } else {
          CacheNode& mid = caches_[n];
          const auto outcome = epc_two_level_round(req, mid, leaves, model_);
          for (std::size_t l = 0; l < n; ++l) {
            const double occupied = static_cast<double>(leaves[l].occupied());
            if (outcome.leaves[l].cached()) leaves[l].admit(req.id, req.size);
            if (cfg_.demand == DemandMeasure::Arrival)
              reprice(leaves[l], occupied + (outcome.leaf_rule_admits[l] ? static_cast<double>(req.size) : 0.0));
          }
          const double occupied = static_cast<double>(mid.occupied());
          if (outcome.mid.cached()) mid.admit(req.id, req.size);
          if (cfg_.demand == DemandMeasure::Arrival)
            reprice(mid, occupied + (outcome.mid_rule_admits ? static_cast<double>(req.size) : 0.0));
        }
        if (cfg_.demand == DemandMeasure::ActiveSet)
          for (auto& c : caches_) reprice(c, active_demand(c));
        break;
    }
  }

  // Committed occupancy plus every uncached active request that the rule
  // would admit at the current price.
  double active_demand(const CacheNode& cache) {
    const std::size_t n = cfg_.attachment_points;
    const auto& d = delays();
    std::vector<Decision> pending;
    std::vector<Storage> sizes;
    for (const auto& [id, m] : mobiles_) {
      const auto& req = m.request;
      if (cache.holds(req.id)) continue;
      bool wants = false;
      if (cache.level() == CacheLevel::Leaf) {
        const bool via_mid = has_mid_ && caches_[n].holds(req.id);
        const double from = via_mid ? d.mid_for(req.id, cache.id()) : d.remote_for(req.id, cache.id());
        wants = epc_rule(req.weight(cache.id()), from - d.local_for(req.id, cache.id()), req.size, cache.price());
      } else {
        std::span<const CacheNode> leaves(caches_.data(), n);
        wants = epc_mid_rule_admits(req, cache, leaves, model_);
      }
      if (!wants) continue;
      pending.push_back({req.id, cache.id(), Action::Full, 0.0});
      sizes.push_back(req.size);
    }
    return measure_demand(cache, pending, sizes);
  }

  // Round-based optimum over all active requests; earlier placements may be
  // displaced.
  void reallocate() {
    std::vector<ObjectRequest> active;
    active.reserve(mobiles_.size());
    for (const auto& [id, m] : mobiles_) active.push_back(m.request);
    for (auto& c : caches_) c.clear();
    const auto allocation = optimal_allocate_round(active, caches_, model_);
    for (const auto& [cache, ids] : allocation)
      for (RequestId r : ids) caches_[cache].admit(r, 1);
  }

  void on_handoff(const SimEvent& ev) {
    auto it = mobiles_.find(ev.mobile);
    if (it == mobiles_.end()) throw std::logic_error("handoff for unknown mobile");
    const Mobile& m = it->second;
    const auto dest = static_cast<CacheId>(m.destination);
    const auto& d = delays();
    const RequestId r = m.request.id;

    const double nocache = d.remote_for(r, dest);
    double delay = nocache;
    if (caches_[dest].holds(r)) {
      delay = d.local_for(r, dest);
      ++local_hits_;
    } else if (has_mid_ && caches_[cfg_.attachment_points].holds(r)) {
      delay = d.mid_for(r, dest);
      ++mid_hits_;
    }
    record(delay, nocache);

    for (auto& c : caches_)
      if (c.release(r) > 0 && scheme_ == SchemeKind::EPC) push(ev.time, SimEvent::Kind::PriceTick, ev.mobile, c.id());

    estimator_.observe(m.cls, m.destination);
    delays().remote_overrides.erase(r);
    mobiles_.erase(it);

    ++handoffs_;
    if (handoffs_ < cfg_.handoffs) push(ev.time, SimEvent::Kind::NewRequest, next_mobile_++);
  }

  void record(double delay, double nocache) {
    metrics_.delay_by_handoff[handoffs_] += delay;
    metrics_.nocache_by_handoff[handoffs_] += nocache;
    ++metrics_.handoffs_completed;
    if (handoffs_ < cfg_.warmup) return;
    ++metrics_.measured_handoffs;
    metrics_.scheme_delay += delay;
    metrics_.nocache_delay += nocache;
    metrics_.leaf_hits += local_hits_;
    metrics_.mid_hits += mid_hits_;
    local_hits_ = mid_hits_ = 0;
  }

  void check_conservation() const {
    for (const auto& c : caches_)
      if (c.occupied() > c.capacity() || c.occupied() < 0) throw std::logic_error("cache occupancy out of bounds");
  }

  const SimConfig& cfg_;
  SchemeKind scheme_;
  std::size_t hood_;
  std::uint64_t seed_;
  RunMetrics& metrics_;
  const EventObserver& observer_;

  std::vector<CacheNode> caches_;
  bool has_mid_ = false;
  DelayModel model_;
  ProbEstimator estimator_;
  std::map<MobileId, Mobile> mobiles_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, EventLater> queue_;
  std::uint64_t seq_ = 0;
  MobileId next_mobile_ = 0;
  std::uint64_t handoffs_ = 0;
  std::uint64_t local_hits_ = 0;
  std::uint64_t mid_hits_ = 0;

  double last_time_ = 0.0;
  double measured_time_ = 0.0;
  std::vector<double> occupancy_time_;
};

}  // namespace

RunMetrics run(const SimConfig& config, SchemeKind scheme, std::uint64_t seed, const EventObserver& observer) {
  config.validate(scheme);
  RunMetrics metrics;
  metrics.delay_by_handoff.assign(config.handoffs, 0.0);
  metrics.nocache_by_handoff.assign(config.handoffs, 0.0);
  const std::size_t hoods = config.neighborhood_count();
  for (std::size_t h = 0; h < hoods; ++h) {
    NeighborhoodSim sim(config, scheme, h, derive_seed(seed, h), metrics, observer);
    sim.run();
  }
  return metrics;
}

TransientSeries transient_gain_series(const RunMetrics& metrics, std::size_t window) {
  const std::size_t n = metrics.delay_by_handoff.size();
  if (window == 0 || window > n) throw std::invalid_argument("window must be between 1 and the run length");
  TransientSeries s;
  s.window = window;
  double delay = 0.0, nocache = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    delay += metrics.delay_by_handoff[i];
    nocache += metrics.nocache_by_handoff[i];
    if (i >= window) {
      delay -= metrics.delay_by_handoff[i - window];
      nocache -= metrics.nocache_by_handoff[i - window];
    }
    if (i + 1 >= window) s.gain.push_back(nocache > 0.0 ? 1.0 - delay / nocache : 0.0);
  }
  return s;
}

Recovery recovery_after(const TransientSeries& series, std::size_t from, std::size_t tail, double fraction) {
  const std::size_t n = series.gain.size();
  if (tail == 0 || tail > n) throw std::invalid_argument("tail must be between 1 and the series length");
  Recovery r;
  r.steady_state = std::accumulate(series.gain.end() - static_cast<std::ptrdiff_t>(tail), series.gain.end(), 0.0) /
                   static_cast<double>(tail);
  const double target = fraction * r.steady_state;
  // gain[i] ends at handoff i + window - 1
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t last = i + series.window - 1;
    if (last < from) continue;
    if (series.gain[i] >= target) {
      r.handoffs = last - from;
      break;
    }
  }
  return r;
}

}  // namespace procache
