#include <doctest.h>

#include <cmath>
#include <random>

#include "procache/model.hpp"
#include "support.hpp"

using namespace procache;
using namespace testing_support;

TEST_SUITE("model") {

// Oracle: walk every destination by hand and weight its delay.
TEST_CASE("expected delay matches enumeration of destinations") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const CacheId n = 4;
    const bool tiered = trial % 2 == 1;
    const Hierarchy h = tiered ? Hierarchy::two_level(n, n) : Hierarchy::flat(n);
    auto req = request(trial, random_probs(n, rng));
    const auto model = delays(1.0, 4.0, 9.0);

    std::map<CacheId, Decision> placed;
    std::vector<bool> at(n + 1, false);
    for (CacheId c = 0; c < (tiered ? n + 1 : n); ++c) {
      at[c] = std::bernoulli_distribution(0.4)(rng);
      placed[c] = {req.id, c, at[c] ? Action::Full : Action::Skip, 0.0};
    }
    double oracle = 0.0;
    for (CacheId l = 0; l < n; ++l) {
      double d = 9.0;
      if (at[l]) d = 1.0;
      else if (tiered && at[n]) d = 4.0;
      oracle += req.probability(l) * d;
    }
    CHECK(expected_delay(req, placed, h, model) == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("expected delay worked cases") {
  const auto model = delays(1.0, 5.0, 10.0);
  const auto h = Hierarchy::flat(2);
  auto certain = request(1, {{0, 1.0}});
  CHECK(expected_delay(certain, {{0, {1, 0, Action::Full}}}, Hierarchy::flat(1), model) == doctest::Approx(1.0));

  auto split = request(2, {{0, 0.7}, {1, 0.3}});
  std::map<CacheId, Decision> none{{0, {2, 0, Action::Skip}}, {1, {2, 1, Action::Skip}}};
  CHECK(expected_delay(split, none, h, model) == doctest::Approx(10.0));
  std::map<CacheId, Decision> at_a{{0, {2, 0, Action::Full}}, {1, {2, 1, Action::Skip}}};
  CHECK(expected_delay(split, at_a, h, model) == doctest::Approx(3.7));
}

TEST_CASE("mid hit never costs more than fetching from the source") {
  auto model = delays(1.0, 5.0, 10.0);
  std::get<SizeIndependentDelays>(model.kind).remote_overrides.set(3, 0, 2.8);
  auto req = request(3, {{0, 1.0}});
  std::map<CacheId, Decision> mid_only{{0, {3, 0, Action::Skip}}, {1, {3, 1, Action::Full}}};
  CHECK(expected_delay(req, mid_only, Hierarchy::two_level(1, 1), model) == doctest::Approx(2.8));
}

TEST_CASE("expected delay rejects unknown caches") {
  const auto model = delays(1.0, 5.0, 10.0);
  auto req = request(1, {{0, 1.0}});
  CHECK_THROWS_AS(expected_delay(req, {{0, {1, 0, Action::Skip}}, {5, {1, 5, Action::Full}}},
                                 Hierarchy::flat(1), model),
                  StructuralError);
  auto stray = request(2, {{3, 1.0}});
  CHECK_THROWS_AS(expected_delay(stray, {}, Hierarchy::flat(1), model), StructuralError);
}

TEST_CASE("rate-based expected delay uses the cached amount") {
  SizeDependentRates rates{50.0, 10.0};
  DelayModel model{rates};
  auto req = request(1, {{0, 1.0}}, 100);
  CHECK(expected_delay(req, {{0, {1, 0, Action::Skip}}}, Hierarchy::flat(1), model) == doctest::Approx(10.0));
  CHECK(expected_delay(req, {{0, {1, 0, Action::Full}}}, Hierarchy::flat(1), model) == doctest::Approx(2.0));
  CHECK(expected_delay(req, {{0, {1, 0, Action::Partial, 50.0}}}, Hierarchy::flat(1), model) ==
        doctest::Approx(6.0));
}

TEST_CASE("gain") {
  CHECK(gain(10.0, 10.0) == doctest::Approx(0.0));
  CHECK(gain(1.0, 10.0) == doctest::Approx(0.9));
  CHECK(gain(3.7, 10.0) == doctest::Approx(0.63));
  CHECK_THROWS_AS(gain(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(gain(11.0, 10.0), std::invalid_argument);
}

TEST_CASE("cache node bookkeeping") {
  CacheNode c(0, CacheLevel::Leaf, 3, 0.5);
  c.admit(10, 2);
  CHECK(c.occupied() == 2);
  CHECK(c.holds(10));
  CHECK_THROWS_AS(c.admit(10, 1), std::logic_error);
  CHECK_THROWS_AS(c.admit(11, 2), std::logic_error);
  CHECK(c.release(10) == 2);
  CHECK(c.release(10) == 0);
  CHECK(c.free_space() == 3);
  CHECK_THROWS_AS(c.set_price(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(CacheNode(1, CacheLevel::Leaf, -1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(CacheNode(1, CacheLevel::Mid, 1, 0.5, CacheId{0}), StructuralError);
}

TEST_CASE("request validation") {
  CHECK_NOTHROW(request(1, {{0, 0.5}, {1, 0.5}}).validate());
  CHECK_THROWS_AS(request(1, {{0, 0.5}, {1, 0.4}}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(request(1, {{0, 1.0}}, 0).validate(), std::invalid_argument);
  auto r = request(1, {{0, 1.0}});
  r.popularity = -0.1;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
}

TEST_CASE("delay ordering") {
  CHECK_NOTHROW(delays(1, 5, 10).validate(true));
  CHECK_THROWS_AS(delays(1, 12, 10).validate(true), std::invalid_argument);
  CHECK_NOTHROW(delays(1, 12, 10).validate(false));
  const DelayModel inverted{SizeDependentRates{10.0, 50.0}};
  CHECK_THROWS_AS(inverted.validate(false), std::invalid_argument);
}

TEST_CASE("overrides are grouped by request") {
  DelayOverrides o;
  CHECK(o.empty());
  o.set(1, 2, 3.0);
  o.set(1, 2, 4.0);
  o.set(1, 5, 6.0);
  REQUIRE(o.find(1, 2));
  CHECK(*o.find(1, 2) == 4.0);
  CHECK(o.find(1, 3) == nullptr);
  o.erase(1);
  CHECK(o.find(1, 5) == nullptr);
  CHECK(o.empty());
}

}
