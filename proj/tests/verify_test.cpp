#include <doctest.h>

#include <json.hpp>

#include "procache/verify.hpp"

using namespace procache;

TEST_SUITE("verify") {

TEST_CASE("every suite passes") {
  for (const auto& suite : verify_suites()) {
    for (const auto& r : run_suite(suite)) {
      INFO(suite << " " << r.property << " " << r.counterexample);
      CHECK(r.pass);
      CHECK(r.cases > 0);
      CHECK(r.counterexample.empty());
    }
  }
}

TEST_CASE("the tie-break mutation is caught") {
  VerifyOptions opt;
  opt.inject_tie_break_bug = true;
  bool caught = false;
  for (const auto& r : run_suite("flat_equivalence", opt)) {
    if (r.pass) continue;
    caught = true;
    const auto j = nlohmann::json::parse(r.counterexample);
    CHECK(j.at("epc") != j.at("optimal"));
  }
  CHECK(caught);
}

TEST_CASE("json lines") {
  PropertyResult r{"knapsack", "greedy_feasible", false, 3, R"({"capacity":2})"};
  const auto j = nlohmann::json::parse(to_json_line(r));
  CHECK(j["suite"] == "knapsack");
  CHECK(j["pass"] == false);
  CHECK(j["cases"] == 3);
  CHECK(j["counterexample"]["capacity"] == 2);
  CHECK_THROWS_AS(run_suite("nope"), std::invalid_argument);
}

TEST_CASE("grid search respects the capacity") {
  UtilitySpec s;
  s.max_amount = 80.0;
  s.object_size = 100.0;
  s.rate_local = 50.0;
  s.rate_remote = 10.0;
  std::vector<PartialRequest> one{{1, s, 0.5}};
  const auto g = partial_grid_search(one, 30.0);
  CHECK(g.allocation.amounts.at(1) == doctest::Approx(30.0));
  const auto roomy = partial_grid_search(one, 300.0);
  CHECK(roomy.allocation.amounts.at(1) == doctest::Approx(80.0));
}

}
