#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "procache/engine.hpp"

using namespace procache;

namespace {

SimConfig small(double share = 0.0, Storage tc = 240) {
  SimConfig c;
  c.total_cache = tc;
  c.mid_share = share;
  c.handoffs = 3000;
  c.warmup = 500;
  return c;
}

double mean_gain(SimConfig c, SchemeKind s, int seeds) {
  double g = 0.0;
  for (int k = 1; k <= seeds; ++k) g += run(c, s, k).gain();
  return g / seeds;
}

}  // namespace

TEST_SUITE("engine") {

// Oracle: an independent replay of cache contents through the observer.
TEST_CASE("observer sees conserved storage and a constant population") {
  for (auto scheme : {SchemeKind::EPC, SchemeKind::Naive, SchemeKind::Oracle}) {
    for (double share : {0.0, 0.25, 1.0}) {
      auto c = small(share);
      c.handoffs = 1500;
      std::size_t requests = 0, handoffs = 0;
      bool bounded = true, population = true;
      run(c, scheme, 3, [&](const SimEvent& ev, std::span<const CacheNode> caches, std::size_t active) {
        Storage total = 0, cap = 0;
        for (const auto& node : caches) {
          bounded = bounded && node.occupied() <= node.capacity() && node.occupied() >= 0 &&
                    node.occupied() == static_cast<Storage>(node.cached_set().size()) && node.price() >= 0.0;
          total += node.occupied();
          cap += node.capacity();
        }
        bounded = bounded && total <= cap && cap == c.total_cache;
        if (ev.kind == SimEvent::Kind::NewRequest) ++requests;
        if (ev.kind == SimEvent::Kind::Handoff) ++handoffs;
        if (requests >= c.mobiles) {
          if (ev.kind == SimEvent::Kind::NewRequest) population = population && active == c.mobiles;
          else population = population && (active == c.mobiles || active + 1 == c.mobiles);
        }
      });
      CHECK(bounded);
      CHECK(population);
      CHECK(handoffs == c.handoffs);
    }
  }
}

TEST_CASE("no-cache counterfactual is the remote delay per handoff") {
  const auto c = small(0.25);
  const auto m = run(c, SchemeKind::EPC, 1);
  CHECK(m.handoffs_completed == c.handoffs);
  CHECK(m.measured_handoffs == c.handoffs - c.warmup);
  CHECK(m.nocache_delay == doctest::Approx(c.delay_remote * static_cast<double>(m.measured_handoffs)));
  for (double d : m.nocache_by_handoff) CHECK(d == c.delay_remote);
  for (double d : m.delay_by_handoff)
    CHECK((d == c.delay_local || d == c.delay_mid || d == c.delay_remote));
}

TEST_CASE("gain endpoints") {
  for (auto s : {SchemeKind::EPC, SchemeKind::Naive, SchemeKind::Oracle, SchemeKind::Optimal}) {
    auto none = small(0.0, 0);
    none.handoffs = 1000;
    CHECK(run(none, s, 1).gain() == 0.0);

    auto plenty = small(0.0, 100000);
    plenty.handoffs = 1000;
    CHECK(run(plenty, s, 1).gain() == doctest::Approx(0.9));

    auto mid = small(1.0, 240);
    mid.handoffs = 1000;
    CHECK(run(mid, s, 1).gain() == doctest::Approx(0.5));
  }
}

TEST_CASE("runs are deterministic") {
  const auto c = small(0.5);
  const auto a = run(c, SchemeKind::EPC, 42);
  const auto b = run(c, SchemeKind::EPC, 42);
  CHECK(a.delay_by_handoff == b.delay_by_handoff);
  CHECK(a.utilization == b.utilization);
  CHECK(a.final_prices == b.final_prices);
  CHECK(run(c, SchemeKind::EPC, 43).delay_by_handoff != a.delay_by_handoff);
}

TEST_CASE("scheme ordering on a flat structure") {
  SimConfig c;
  c.skew = Skewness::SKD90;
  const double opt = mean_gain(c, SchemeKind::Optimal, 10);
  const double epc = mean_gain(c, SchemeKind::EPC, 10);
  const double naive = mean_gain(c, SchemeKind::Naive, 10);
  CHECK(opt >= epc);
  CHECK(epc >= naive);
}

TEST_CASE("arrival demand fills overloaded leaves") {
  auto c = small(0.0, 80);
  c.skew = Skewness::SKD90;
  c.demand = DemandMeasure::Arrival;
  const auto m = run(c, SchemeKind::EPC, 1);
  for (double u : m.utilization) {
    CHECK(u >= 0.95);
    CHECK(u <= 1.0);
  }
  auto active = c;
  active.demand = DemandMeasure::ActiveSet;
  const auto a = run(active, SchemeKind::EPC, 1);
  CHECK(std::accumulate(a.utilization.begin(), a.utilization.end(), 0.0) <
        std::accumulate(m.utilization.begin(), m.utilization.end(), 0.0));
}

TEST_CASE("estimates") {
  ProbEstimator e(1, 8, 1.0);
  for (double p : e.estimate(0)) CHECK(p == doctest::Approx(0.125));

  ProbEstimator exact(1, 8, 0.0);
  const std::vector<int> counts{90, 2, 2, 2, 1, 1, 1, 1};
  for (std::size_t d = 0; d < 8; ++d)
    for (int k = 0; k < counts[d]; ++k) exact.observe(0, d);
  const auto v = exact.estimate(0);
  const auto skd90 = skew_vector(Skewness::SKD90);
  for (std::size_t d = 0; d < 8; ++d) CHECK(v[d] == doctest::Approx(skd90[d]));
  CHECK(exact.observations(0) == 100);
  CHECK(exact.count(0, 0) == 90);
  CHECK_THROWS(exact.observe(1, 0));

  // Average L1 error of 1000-transition estimates over independent histories.
  Rng rng(12);
  const auto truth = skew_vector(Skewness::SKD70);
  double l1 = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    ProbEstimator learn(1, 8, 1.0);
    for (int i = 0; i < 1000; ++i) learn.observe(0, sample_destination(truth, rng));
    const auto est = learn.estimate(0);
    CHECK(std::accumulate(est.begin(), est.end(), 0.0) == doctest::Approx(1.0));
    for (std::size_t d = 0; d < 8; ++d) l1 += std::abs(est[d] - truth[d]);
  }
  CHECK(l1 / 50.0 <= 0.05);
}

TEST_CASE("event order") {
  SimEvent a{1.0, SimEvent::Kind::NewRequest, 5};
  SimEvent b{1.0, SimEvent::Kind::Handoff, 9};
  SimEvent c{0.5, SimEvent::Kind::PriceTick, 10};
  SimEvent d{1.0, SimEvent::Kind::NewRequest, 6};
  CHECK(event_before(c, b));
  CHECK(event_before(b, a));
  CHECK(event_before(a, d));
  CHECK_FALSE(event_before(a, a));
}

TEST_CASE("config checks") {
  SimConfig c;
  CHECK(c.leaf_capacities() == std::vector<Storage>(8, 30));
  c.mid_share = 0.25;
  CHECK(c.mid_capacity() == 60);
  c.total_cache = 243;
  c.mid_share = 0.0;
  auto caps = c.leaf_capacities();
  CHECK(caps[0] == 31);
  CHECK(caps[3] == 30);
  CHECK(std::accumulate(caps.begin(), caps.end(), Storage{0}) == 243);

  SimConfig bad;
  bad.mid_share = 0.5;
  CHECK_THROWS_AS(bad.validate(SchemeKind::Optimal), std::invalid_argument);
  CHECK_NOTHROW(bad.validate(SchemeKind::EPC));
  bad.warmup = bad.handoffs;
  CHECK_THROWS_AS(bad.validate(SchemeKind::EPC), std::invalid_argument);
  SimConfig internet;
  internet.topology_kind = Topology::Kind::InternetScaled;
  CHECK_THROWS_AS(run(internet, SchemeKind::EPC, 1), std::invalid_argument);
}

TEST_CASE("Internet runs draw hop-based remote delays") {
  Rng rng(1);
  Topology t = build_internet_topology(synthesize_as_graph(400, rng));
  form_neighborhoods(t, 1, 8, rng);
  SimConfig c = small(0.25);
  c.topology_kind = Topology::Kind::InternetScaled;
  c.topology = &t;
  c.handoffs = 1500;
  const auto m = run(c, SchemeKind::Oracle, 2);
  for (double d : m.nocache_by_handoff) {
    const double hops = (d / c.delay_local - 1.0) / 1.8 + 1.0;
    CHECK(hops == doctest::Approx(std::round(hops)));
  }
  for (std::size_t i = 0; i < m.delay_by_handoff.size(); ++i) CHECK(m.delay_by_handoff[i] <= m.nocache_by_handoff[i]);
  CHECK(m.gain() > 0.0);
  CHECK(m.gain() < 1.0);
}

TEST_CASE("windowed series") {
  RunMetrics m;
  m.delay_by_handoff = {1, 1, 5, 5, 5, 5};
  m.nocache_by_handoff = {10, 10, 10, 10, 10, 10};
  const auto s = transient_gain_series(m, 2);
  REQUIRE(s.gain.size() == 5);
  CHECK(s.gain[0] == doctest::Approx(0.9));
  CHECK(s.gain[1] == doctest::Approx(0.7));
  CHECK(s.gain[4] == doctest::Approx(0.5));
  CHECK_THROWS_AS(transient_gain_series(m, 7), std::invalid_argument);

  TransientSeries step;
  step.window = 3;
  step.gain = {0.2, 0.2, 0.2, 0.5, 0.8, 1.0, 1.0, 1.0};
  const auto r = recovery_after(step, 4, 3);
  CHECK(r.steady_state == doctest::Approx(1.0));
  // gain[5] is the first at 0.95 and its window ends at handoff 7.
  REQUIRE(r.handoffs);
  CHECK(*r.handoffs == 3);
  TransientSeries drop{1, {1.0, 0.1, 0.1}};
  CHECK_FALSE(recovery_after(drop, 1, 3).handoffs.has_value());
}

TEST_CASE("constant profile gives a flat series after warmup") {
  SimConfig c;
  c.skew = Skewness::SKD70;
  c.mid_share = 0.25;
  RunMetrics merged;
  for (int k = 1; k <= 4; ++k) merged.merge(run(c, SchemeKind::EPC, k));
  const auto s = transient_gain_series(merged, 600);
  double mean = 0.0;
  std::size_t count = 0;
  for (std::size_t i = c.warmup; i < s.gain.size(); ++i, ++count) mean += s.gain[i];
  mean /= static_cast<double>(count);
  double worst = 0.0;
  for (std::size_t i = c.warmup; i < s.gain.size(); ++i) worst = std::max(worst, std::abs(s.gain[i] - mean));
  CHECK(worst < 0.05 * mean);
}

TEST_CASE("merging adds series and totals") {
  RunMetrics a, b;
  a.delay_by_handoff = {1, 2};
  a.nocache_by_handoff = {3, 4};
  a.scheme_delay = 3;
  b.delay_by_handoff = {1, 1, 1};
  b.nocache_by_handoff = {2, 2, 2};
  b.scheme_delay = 1;
  a.merge(b);
  CHECK(a.delay_by_handoff == std::vector<double>{2, 3, 1});
  CHECK(a.nocache_by_handoff == std::vector<double>{5, 6, 2});
  CHECK(a.scheme_delay == 4);
}

}
