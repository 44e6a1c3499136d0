#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "procache/workload.hpp"

using namespace procache;

namespace {

Graph star(std::size_t leaves) {
  Graph g(leaves + 1);
  for (NodeId n = 1; n <= leaves; ++n) g.add_edge(0, n);
  return g;
}

}  // namespace

TEST_SUITE("workload") {

// Oracle: the hop formula applied to distances found by brute-force BFS.
TEST_CASE("hop distances agree with repeated relaxation") {
  Rng rng(31);
  Graph g = synthesize_as_graph(60, rng, 0.3);
  const std::size_t n = g.node_count();
  std::vector<std::vector<int>> d(n, std::vector<int>(n, 1 << 20));
  for (NodeId u = 0; u < n; ++u) {
    d[u][u] = 0;
    for (NodeId v : g.neighbors(u)) d[u][v] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  for (NodeId u = 0; u < n; ++u) {
    const auto bfs = g.bfs(u);
    for (NodeId v = 0; v < n; ++v) CHECK(bfs[v] == d[u][v]);
  }
  CHECK_THROWS_AS(assign_remote_delay(0, 0, g), std::invalid_argument);
}

TEST_CASE("skew sets") {
  for (auto s : {Skewness::SKD50, Skewness::SKD70, Skewness::SKD90}) {
    const auto v = skew_vector(s);
    CHECK(v.size() == 8);
    CHECK(std::accumulate(v.begin(), v.end(), 0.0) == doctest::Approx(1.0));
    CHECK(std::is_sorted(v.rbegin(), v.rend()));
  }
  CHECK(skew_vector(Skewness::SKD90)[0] == 0.9);
  CHECK(parse_skewness("skd70") == Skewness::SKD70);
  CHECK(parse_skewness("90") == Skewness::SKD90);
  CHECK(to_string(Skewness::SKD50) == "SKD50");
  CHECK_THROWS_AS(parse_skewness("SKD80"), std::invalid_argument);
}

TEST_CASE("sampled peak frequency") {
  Rng rng(1);
  const auto v = skew_vector(Skewness::SKD90);
  std::size_t peak = 0;
  const std::size_t draws = 1'000'000;
  for (std::size_t i = 0; i < draws; ++i) peak += sample_destination(v, rng) == 0;
  CHECK(std::abs(static_cast<double>(peak) / draws - 0.9) <= 0.01);

  std::vector<double> degenerate{1, 0, 0, 0, 0, 0, 0, 0};
  for (int i = 0; i < 1000; ++i) CHECK(sample_destination(degenerate, rng) == 0);
  CHECK_THROWS_AS(sample_destination(std::vector<double>{}, rng), std::invalid_argument);
}

TEST_CASE("rotated peaks spread the population evenly") {
  std::vector<double> expected(8, 0.0);
  for (std::size_t m = 0; m < 160; ++m) {
    MobilityProfile p{skew_vector(Skewness::SKD70), m % 8, 0.0};
    const auto v = p.rotated();
    CHECK(v[m % 8] == 0.7);
    for (std::size_t l = 0; l < 8; ++l) expected[l] += v[l];
  }
  for (double e : expected) CHECK(e == doctest::Approx(20.0));
}

TEST_CASE("perturbation") {
  Rng rng(5);
  const auto base = skew_vector(Skewness::SKD70);
  CHECK(perturb_profile(base, 0.0, rng) == base);
  CHECK_THROWS_AS(perturb_profile(base, -0.1, rng), std::invalid_argument);

  double sum = 0.0, sq = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto v = perturb_profile(base, 0.30, rng);
    CHECK(std::accumulate(v.begin(), v.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    for (double x : v) CHECK(x >= 0.0);
    sum += v[0];
    sq += v[0] * v[0];
  }
  const double mean = sum / draws;
  const double sd = std::sqrt(sq / draws - mean * mean);
  CHECK(sd == doctest::Approx(0.30 * 0.70).epsilon(0.15));
}

TEST_CASE("edge list round trip") {
  std::istringstream in("# comment\n0 1\n1 2\n\n2 0\n1 0\n3 4\n");
  Graph g = read_edge_list(in);
  CHECK(g.node_count() == 5);
  CHECK(g.edge_count() == 4);
  CHECK_FALSE(g.connected());
  std::ostringstream out;
  write_edge_list(g, out);
  std::istringstream again(out.str());
  Graph h = read_edge_list(again);
  CHECK(h.edge_count() == g.edge_count());
  CHECK(h.node_count() == g.node_count());
  std::istringstream bad("0 x\n");
  CHECK_THROWS_AS(read_edge_list(bad), std::invalid_argument);
  CHECK_THROWS_AS(load_edge_list("/nonexistent/edges.txt"), std::runtime_error);
}

TEST_CASE("synthesized graphs look AS-like") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    Graph g = synthesize_as_graph(400, rng);
    CHECK(g.node_count() == 400);
    CHECK(g.connected());
    std::vector<std::size_t> deg;
    for (NodeId n = 0; n < 400; ++n) deg.push_back(g.degree(n));
    std::sort(deg.begin(), deg.end());
    CHECK(deg.back() >= 20);
    CHECK(deg[200] <= 3);
    CHECK_NOTHROW(build_internet_topology(g));
  }
}

TEST_CASE("topology preconditions") {
  Graph path(400);
  for (NodeId n = 0; n + 1 < 400; ++n) path.add_edge(n, n + 1);
  CHECK_THROWS_AS(build_internet_topology(path), std::invalid_argument);
  Graph split(4);
  split.add_edge(0, 1);
  split.add_edge(2, 3);
  CHECK_THROWS_AS(build_internet_topology(split, 0), std::invalid_argument);
}

TEST_CASE("neighborhoods around a hub") {
  Topology t = build_internet_topology(star(81));
  CHECK(t.stubs.size() == 81);
  Rng rng(3);
  form_neighborhoods(t, 10, 8, rng);
  REQUIRE(t.neighborhoods.size() == 10);
  std::set<NodeId> seen;
  for (const auto& hood : t.neighborhoods) {
    CHECK(hood.size() == 8);
    const auto dist = t.graph.bfs(hood.front());
    for (std::size_t i = 1; i < hood.size(); ++i) CHECK(dist[hood[i]] == 2);
    for (NodeId n : hood) CHECK(seen.insert(n).second);
  }
  CHECK(t.sources == std::vector<NodeId>{0});
  CHECK(t.attachment_points() == 80);
  CHECK(t.hops_from_member(t.neighborhoods[0][0], 0) == 1);
  CHECK_THROWS_AS(t.hops_from_member(0, 1), std::invalid_argument);

  Rng rng2(3);
  Topology u = build_internet_topology(star(81));
  form_neighborhoods(u, 10, 8, rng2);
  CHECK(u.neighborhoods == t.neighborhoods);

  Rng rng3(3);
  CHECK_THROWS_AS(form_neighborhoods(u, 11, 8, rng3), std::invalid_argument);
}

TEST_CASE("ties at equal distance go to the lowest id") {
  Topology t = build_internet_topology(star(81));
  Rng rng(9);
  form_neighborhoods(t, 1, 8, rng);
  const auto& hood = t.neighborhoods[0];
  std::vector<NodeId> rest(hood.begin() + 1, hood.end());
  CHECK(std::is_sorted(rest.begin(), rest.end()));
  NodeId expect = 1;
  for (NodeId n : rest) {
    if (expect == hood.front()) ++expect;
    CHECK(n == expect++);
  }
}

TEST_CASE("hop-based delay ratio") {
  CHECK(remote_delay_ratio(6) == doctest::Approx(10.0));
  CHECK(remote_delay_ratio(1) == doctest::Approx(1.0));
  CHECK(remote_delay_ratio(2) == doctest::Approx(2.8));
  CHECK_THROWS_AS(remote_delay_ratio(0), std::invalid_argument);
  Graph g(4);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  CHECK(assign_remote_delay(1, 0, g) == doctest::Approx(1.0));
  CHECK(assign_remote_delay(2, 0, g) == doctest::Approx(2.8));
  CHECK_THROWS_AS(assign_remote_delay(3, 0, g), std::invalid_argument);
}

TEST_CASE("seed derivation separates streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(5, 7) == derive_seed(5, 7));
}

}
