#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "procache/experiment.hpp"

using namespace procache;

namespace {

ResultRow row(std::string scheme, double share, std::optional<std::uint64_t> seed, double gain) {
  ResultRow r;
  r.scheme = std::move(scheme);
  r.skew = "SKD70";
  r.mc_over_tc = share;
  r.tc = 240;
  r.gamma = 2.5;
  r.seed = seed;
  r.gain = gain;
  r.avg_delay = 10.0 * (1.0 - gain);
  return r;
}

std::string csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  emit_csv(rows, out);
  return out.str();
}

}  // namespace

TEST_SUITE("experiment") {

// Oracle: the textbook t-interval.
TEST_CASE("two-sample interval") {
  const auto s = aggregate({0.6, 0.7});
  CHECK(s.n == 2);
  CHECK(s.mean == doctest::Approx(0.65));
  CHECK(s.stddev == doctest::Approx(0.0707107).epsilon(1e-5));
  REQUIRE(s.ci_halfwidth);
  CHECK(*s.ci_halfwidth == doctest::Approx(12.7062 * 0.0707107 / std::sqrt(2.0)).epsilon(1e-4));
  CHECK(*s.ci_halfwidth == doctest::Approx(0.635).epsilon(1e-3));
  CHECK(*aggregate({0.5, 0.5, 0.5}).ci_halfwidth == 0.0);
  CHECK_FALSE(aggregate({0.5}).ci_halfwidth);
  CHECK_THROWS(aggregate({}));
}

TEST_CASE("csv layout") {
  const auto one = csv({row("epc", 0.25, 1, 0.5)});
  CHECK(std::count(one.begin(), one.end(), '\n') == 2);
  CHECK(one.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  CHECK(one.find("epc,SKD70,0.25,240,2.5,1,0.5,5,\n") != std::string::npos);
}

TEST_CASE("csv is stable and parses back") {
  std::vector<ResultRow> rows{row("naive", 0.5, 2, 0.41), row("epc", 0.25, 2, 0.7123456789), row("epc", 0.25, 1, 0.69)};
  rows = with_means(rows);
  const auto text = csv(rows);
  auto shuffled = rows;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(csv(shuffled) == text);

  std::istringstream in(text);
  const auto back = parse_csv(in);
  CHECK(csv(back) == text);
  REQUIRE(back.size() == 5);
  CHECK(back[2].is_mean());
  CHECK(back[2].scheme == "epc");
  CHECK(back[2].ci_halfwidth.has_value());
  CHECK(back[4].is_mean());
  CHECK_FALSE(back[4].ci_halfwidth.has_value());

  std::istringstream bad("scheme,skew\nepc\n");
  CHECK_THROWS_AS(parse_csv(bad), std::invalid_argument);
}

TEST_CASE("mean rows come last within a point") {
  CHECK(row_before(row("epc", 0.0, 9, 0.1), row("epc", 0.0, std::nullopt, 0.1)));
  CHECK(row_before(row("epc", 0.0, 1, 0.1), row("epc", 0.0, 2, 0.1)));
  CHECK(row_before(row("epc", 0.0, std::nullopt, 0.1), row("epc", 0.25, 1, 0.1)));
}

TEST_CASE("sweep points") {
  ExperimentConfig c;
  const auto sim = sim_config_for(c, Skewness::SKD90, 0.25, 240, 0.5, nullptr);
  CHECK(sim.delay_local == 20.0);
  CHECK(sim.delay_mid == 100.0);
  CHECK(sim.delay_remote == 200.0);
  CHECK(sim.gamma == 0.5);
  CHECK(sim.skew == Skewness::SKD90);
  CHECK(scheme_applicable(SchemeKind::Optimal, 0.0));
  CHECK(scheme_applicable(SchemeKind::Optimal, 1.0));
  CHECK_FALSE(scheme_applicable(SchemeKind::Optimal, 0.5));
  CHECK(scheme_applicable(SchemeKind::EPC, 0.5));

  c.schemes = {SchemeKind::Optimal, SchemeKind::Naive};
  c.mid_share = {0.0, 0.5};
  c.seeds = {1, 2};
  c.handoffs = 1500;
  const auto rows = sweep(c);
  // optimal at 0 only, naive at both shares; two seeds plus a mean each
  CHECK(rows.size() == 9);
  for (const auto& r : rows) {
    CHECK(r.gain >= 0.0);
    CHECK(r.gain <= 1.0);
  }
  CHECK(csv(rows) == csv(sweep(c)));
}

TEST_CASE("topologies from config") {
  ExperimentConfig c;
  c.topology = Topology::Kind::InternetScaled;
  c.neighborhoods = 3;
  const auto t = build_topology(c);
  CHECK(t->neighborhoods.size() == 3);
  CHECK(t->graph.node_count() == 400);

  const auto path = (std::filesystem::temp_directory_path() / "procache_star.txt").string();
  {
    std::ofstream out(path);
    for (int n = 1; n <= 90; ++n) out << 0 << ' ' << n << '\n';
  }
  c.topology_file = path;
  const auto star = build_topology(c);
  CHECK(star->graph.edge_count() == 90);
  c.neighborhoods = 12;
  CHECK_THROWS_AS(build_topology(c), ConfigError);
  c.topology_file = "/nonexistent/edges.txt";
  CHECK_THROWS_AS(build_topology(c), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("writing to a bad path fails loudly") {
  CHECK_THROWS_AS(write_csv({row("epc", 0.0, 1, 0.5)}, "/nonexistent/dir/out.csv"), std::runtime_error);
}

}
