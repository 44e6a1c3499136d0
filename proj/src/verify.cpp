#include "procache/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "procache/schemes.hpp"
#include "procache/workload.hpp"

namespace procache {

using nlohmann::json;

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> names = {"knapsack", "flat_equivalence", "partial", "quadrature"};
  return names;
}

std::string to_json_line(const PropertyResult& r) {
  json j{{"suite", r.suite}, {"property", r.property}, {"pass", r.pass}, {"cases", r.cases}};
  if (!r.counterexample.empty()) j["counterexample"] = json::parse(r.counterexample);
  return j.dump();
}

namespace {

double objective_of(std::span<const PartialRequest> requests, const std::vector<double>& x) {
  double total = 0.0;
  for (std::size_t i = 0; i < requests.size(); ++i) total += vs_objective(requests[i].utility, x[i], requests[i].q);
  return total;
}

}  // namespace

GridOptimum partial_grid_search(std::span<const PartialRequest> requests, double capacity, std::size_t points,
                                int refinements) {
  const std::size_t n = requests.size();
  if (n == 0 || n > 3) throw std::invalid_argument("grid search handles 1 to 3 requests");
  if (points < 3) throw std::invalid_argument("grid needs at least 3 points per axis");
  double min_total = 0.0;
  for (const auto& r : requests) min_total += r.utility.min_amount;
  if (min_total > capacity) throw std::invalid_argument("capacity below the summed minimum amounts");

  // The objective increases in every x_s, so the last request takes whatever
  // capacity is left (up to its maximum); search over the others.
  const auto& last = requests[n - 1].utility;
  auto complete = [&](std::vector<double> x) -> std::optional<std::vector<double>> {
    double used = 0.0;
    for (double v : x) used += v;
    const double rest = std::min(last.max_amount, capacity - used);
    if (rest < last.min_amount) return std::nullopt;
    x.push_back(rest);
    return x;
  };

  GridOptimum best;
  best.objective = -std::numeric_limits<double>::infinity();
  std::vector<double> best_x;
  auto consider = [&](const std::vector<double>& head) {
    auto x = complete(head);
    if (!x) return;
    const double v = objective_of(requests, *x);
    if (best_x.empty() || v > best.objective) {
      best.objective = v;
      best_x = *x;
    }
  };

  std::vector<double> lo, hi;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    lo.push_back(requests[i].utility.min_amount);
    hi.push_back(requests[i].utility.max_amount);
  }
  auto axis = [&](std::size_t i, std::size_t k) {
    // interior points only: the log objective is -inf at the minimum
    return lo[i] + (hi[i] - lo[i]) * (static_cast<double>(k) + 0.5) / static_cast<double>(points);
  };

  for (int round = 0; round <= refinements; ++round) {
    if (n == 1) {
      consider({});
      break;
    }
    if (n == 2) {
      for (std::size_t a = 0; a < points; ++a) consider({axis(0, a)});
    } else {
      for (std::size_t a = 0; a < points; ++a)
        for (std::size_t b = 0; b < points; ++b) consider({axis(0, a), axis(1, b)});
    }
    if (best_x.empty()) break;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double step = (hi[i] - lo[i]) / static_cast<double>(points);
      const double floor = requests[i].utility.min_amount;
      const double ceil = requests[i].utility.max_amount;
      lo[i] = std::max(floor, best_x[i] - 2.0 * step);
      hi[i] = std::min(ceil, best_x[i] + 2.0 * step);
    }
  }
  for (std::size_t i = 0; i < n; ++i) best.allocation.amounts[requests[i].id] = best_x.empty() ? 0.0 : best_x[i];
  return best;
}

PartialEquilibrium converge_partial_auto(std::span<const PartialRequest> requests, double capacity) {
  PartialEquilibrium eq;
  for (double gamma : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
    PartialLoopOptions opt;
    opt.gamma = gamma;
    opt.max_iterations = 200000;
    // settled once the excess demand stays below 1e-7 storage units
    opt.tolerance = gamma * 1e-7;
    eq = converge_partial(requests, capacity, opt);
    if (eq.converged) return eq;
  }
  return eq;
}

namespace {

PropertyResult make(const std::string& suite, const std::string& property) {
  PropertyResult r;
  r.suite = suite;
  r.property = property;
  return r;
}

void fail(PropertyResult& r, const json& detail) {
  if (r.pass) r.counterexample = detail.dump();
  r.pass = false;
}

json items_json(std::span<const KnapsackItem> items) {
  json arr = json::array();
  for (const auto& it : items) arr.push_back({{"id", it.id}, {"size", it.size}, {"weight", it.weight}});
  return arr;
}

std::vector<PropertyResult> knapsack_suite(const VerifyOptions& opt) {
  Rng rng(derive_seed(opt.seed, 1));
  auto feasible = make("knapsack", "greedy_feasible");
  auto half = make("knapsack", "greedy_at_least_half_optimum");
  auto unit = make("knapsack", "unit_sizes_exact");
  std::uniform_int_distribution<int> count(1, 15);
  std::uniform_int_distribution<Storage> size(1, 10);
  std::uniform_real_distribution<double> weight(0.0, 10.0);

  for (std::size_t k = 0; k < opt.knapsack_instances; ++k) {
    const int n = count(rng);
    std::vector<KnapsackItem> items;
    Storage total = 0;
    for (int i = 0; i < n; ++i) {
      items.push_back({static_cast<RequestId>(i), size(rng), weight(rng)});
      total += items.back().size;
    }
    const Storage cap = std::uniform_int_distribution<Storage>(1, total)(rng);
    const auto exact = knapsack_bruteforce(items, cap);
    const auto greedy = greedy_density_admit(items, cap);
    ++feasible.cases;
    ++half.cases;
    Storage used = 0;
    for (RequestId id : greedy.chosen) used += items[id].size;
    const json detail{{"items", items_json(items)}, {"capacity", cap}, {"greedy_value", greedy.value},
                      {"optimum", exact.value}, {"greedy_used", used}};
    if (used > cap) fail(feasible, detail);
    if (greedy.value < 0.5 * exact.value - 1e-12) fail(half, detail);

    for (auto& it : items) it.size = 1;
    const Storage unit_cap = std::uniform_int_distribution<Storage>(0, n)(rng);
    const auto u_exact = knapsack_bruteforce(items, unit_cap);
    const auto u_greedy = greedy_density_admit(items, unit_cap);
    ++unit.cases;
    if (std::abs(u_exact.value - u_greedy.value) > 1e-9 * std::max(1.0, u_exact.value))
      fail(unit, {{"items", items_json(items)}, {"capacity", unit_cap}, {"greedy_value", u_greedy.value},
                  {"optimum", u_exact.value}});
  }
  return {feasible, half, unit};
}

std::vector<PropertyResult> flat_suite(const VerifyOptions& opt) {
  Rng rng(derive_seed(opt.seed, 2));
  auto equal = make("flat_equivalence", "converged_admission_matches_optimum");
  for (std::size_t k = 0; k < opt.flat_instances; ++k) {
    const int caches = std::uniform_int_distribution<int>(1, 3)(rng);
    const int requests = std::uniform_int_distribution<int>(1, 12)(rng);
    const Storage size = std::uniform_int_distribution<Storage>(1, 3)(rng);
    std::vector<CacheNode> nodes;
    for (int c = 0; c < caches; ++c)
      nodes.emplace_back(static_cast<CacheId>(c), CacheLevel::Leaf, size * std::uniform_int_distribution<Storage>(0, 6)(rng),
                         0.5);

    SizeIndependentDelays d;
    const bool per_object = std::bernoulli_distribution(0.3)(rng);
    std::vector<ObjectRequest> reqs;
    std::vector<std::uint64_t> issue(static_cast<std::size_t>(requests));
    std::iota(issue.begin(), issue.end(), 0);
    std::shuffle(issue.begin(), issue.end(), rng);
    for (int i = 0; i < requests; ++i) {
      ObjectRequest r;
      r.id = static_cast<RequestId>(i);
      r.mobile = r.id;
      r.size = size;
      r.issued_at = issue[static_cast<std::size_t>(i)];
      // coarse probabilities so that ties are common
      std::vector<int> units(static_cast<std::size_t>(caches));
      int sum = 0;
      for (auto& u : units) sum += (u = std::uniform_int_distribution<int>(0, 4)(rng));
      if (sum == 0) {
        units[0] = 1;
        sum = 1;
      }
      for (int c = 0; c < caches; ++c)
        r.trans_probs[static_cast<CacheId>(c)] = static_cast<double>(units[static_cast<std::size_t>(c)]) / sum;
      if (per_object)
        for (int c = 0; c < caches; ++c)
          d.remote_overrides.set(r.id, static_cast<CacheId>(c), std::uniform_int_distribution<int>(2, 4)(rng) * 5.0);
      reqs.push_back(std::move(r));
    }
    DelayModel model{d};
    EpcConvergeOptions eo;
    eo.reverse_tie_break = opt.inject_tie_break_bug;
    auto got = epc_converge_flat(reqs, nodes, model, eo);
    auto want = optimal_allocate_round(reqs, nodes, model);
    ++equal.cases;
    for (auto* a : {&got, &want})
      for (auto& [c, ids] : *a) std::sort(ids.begin(), ids.end());
    if (got != want) {
      json rq = json::array();
      for (const auto& r : reqs) {
        json probs = json::object();
        for (const auto& [c, q] : r.trans_probs) probs[std::to_string(c)] = q;
        rq.push_back({{"id", r.id}, {"issued_at", r.issued_at}, {"q", probs}});
      }
      json caps = json::array();
      for (const auto& c : nodes) caps.push_back(c.capacity());
      json g = json::object(), w = json::object();
      for (const auto& [c, ids] : got) g[std::to_string(c)] = ids;
      for (const auto& [c, ids] : want) w[std::to_string(c)] = ids;
      fail(equal, {{"requests", rq}, {"capacities", caps}, {"size", size}, {"epc", g}, {"optimal", w}});
    }
  }
  return {equal};
}

PartialRequest random_partial(Rng& rng, RequestId id, UtilityShape shape) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PartialRequest r;
  r.id = id;
  auto& s = r.utility;
  s.shape = shape;
  s.object_size = 1.0 + 4.0 * u(rng);
  s.min_amount = 0.3 * s.object_size * u(rng);
  s.max_amount = s.min_amount + (s.object_size - s.min_amount) * (0.3 + 0.7 * u(rng));
  s.rate_remote = 0.5 + 0.5 * u(rng);
  s.rate_local = s.rate_remote * (2.0 + 3.0 * u(rng));
  r.q = 0.1 + 0.9 * u(rng);
  s.steepness = 0.5 + 2.5 * u(rng);
  const double d_lo = transfer_delay(s.max_amount, s.object_size, s.rate_local, s.rate_remote) / r.q;
  const double d_hi = transfer_delay(s.min_amount, s.object_size, s.rate_local, s.rate_remote) / r.q;
  s.midpoint = d_lo + (d_hi - d_lo) * (0.2 + 0.6 * u(rng));
  return r;
}

json partial_json(std::span<const PartialRequest> reqs, double capacity) {
  json arr = json::array();
  for (const auto& r : reqs) {
    const auto& s = r.utility;
    arr.push_back({{"id", r.id},
                   {"shape", s.shape == UtilityShape::Linear ? "linear" : "sigmoid"},
                   {"q", r.q},
                   {"m", s.min_amount},
                   {"M", s.max_amount},
                   {"o", s.object_size},
                   {"R_L", s.rate_local},
                   {"R_R", s.rate_remote},
                   {"k", s.steepness},
                   {"d0", s.midpoint}});
  }
  return {{"requests", arr}, {"capacity", capacity}};
}

std::vector<PropertyResult> partial_suite(const VerifyOptions& opt) {
  Rng rng(derive_seed(opt.seed, 3));
  auto optimum = make("partial", "fixed_point_matches_grid_optimum");
  auto feasible = make("partial", "fixed_point_within_capacity");
  auto fair = make("partial", "utility_proportional_fairness");
  std::uniform_real_distribution<double> u(0.0, 1.0);

  for (std::size_t k = 0; k < opt.partial_instances; ++k) {
    const auto shape = k % 2 == 0 ? UtilityShape::Linear : UtilityShape::Sigmoid;
    const int n = 1 + static_cast<int>(k / 2 % 3);
    std::vector<PartialRequest> reqs;
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < n; ++i) {
      reqs.push_back(random_partial(rng, static_cast<RequestId>(i), shape));
      lo += reqs.back().utility.min_amount;
      hi += reqs.back().utility.max_amount;
    }
    const double capacity = lo + (hi - lo) * (0.1 + 1.0 * u(rng));
    const auto eq = converge_partial_auto(reqs, capacity);
    const auto grid = partial_grid_search(reqs, capacity);
    const double got = total_objective(eq.allocation, reqs);
    ++optimum.cases;
    ++feasible.cases;
    json detail = partial_json(reqs, capacity);
    detail["fixed_point_objective"] = got;
    detail["grid_objective"] = grid.objective;
    detail["price"] = eq.price;
    detail["converged"] = eq.converged;
    if (!eq.converged || std::abs(got - grid.objective) > 1e-3 * std::max(1.0, std::abs(grid.objective)))
      fail(optimum, detail);
    if (eq.allocation.total() > capacity * (1.0 + 1e-12)) fail(feasible, detail);

    for (std::size_t c = 0; c < opt.fairness_candidates; ++c) {
      PartialAllocation cand;
      for (const auto& r : reqs)
        cand.amounts[r.id] = r.utility.min_amount + (r.utility.max_amount - r.utility.min_amount) * u(rng);
      cand = cap_to_capacity(cand, reqs, capacity);
      const double sum = fairness_check(eq.allocation, cand, reqs, capacity);
      ++fair.cases;
      if (sum > 1e-6) {
        json d = partial_json(reqs, capacity);
        d["fairness_sum"] = sum;
        fail(fair, d);
      }
    }
  }
  return {optimum, feasible, fair};
}

std::vector<PropertyResult> quadrature_suite(const VerifyOptions& opt) {
  Rng rng(derive_seed(opt.seed, 4));
  auto closed = make("quadrature", "linear_closed_form_matches_integral");
  auto additive = make("quadrature", "sigmoid_integral_additive");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    auto r = random_partial(rng, 0, UtilityShape::Linear);
    auto& s = r.utility;
    // widen the range so that m + 1 lies inside it
    s.max_amount = s.min_amount + 1.0 + 4.0 * u(rng);
    s.object_size = std::max(s.object_size, s.max_amount);
    const double x = s.min_amount + 1.0 + (s.max_amount - s.min_amount - 1.0) * u(rng);
    const double numeric = vs_quadrature(s, s.min_amount + 1.0, x, r.q);
    const double exact = vs_objective(s, x, r.q) - vs_objective(s, s.min_amount + 1.0, r.q);
    ++closed.cases;
    if (std::abs(numeric - exact) > 1e-8 * std::max(1.0, std::abs(exact)))
      fail(closed, {{"x", x}, {"numeric", numeric}, {"closed_form", exact}, {"m", s.min_amount}, {"q", r.q}});

    auto g = random_partial(rng, 0, UtilityShape::Sigmoid);
    const auto& t = g.utility;
    const double a = t.min_amount + (t.max_amount - t.min_amount) * u(rng);
    const double b = a + (t.max_amount - a) * u(rng);
    const double whole = vs_objective(t, b, g.q);
    const double split = vs_objective(t, a, g.q) + vs_quadrature(t, a, b, g.q);
    ++additive.cases;
    if (std::abs(whole - split) > 1e-9 * std::max(1.0, std::abs(whole)))
      fail(additive, {{"a", a}, {"b", b}, {"whole", whole}, {"split", split}});
  }
  return {closed, additive};
}

}  // namespace

std::vector<PropertyResult> run_suite(const std::string& suite, const VerifyOptions& options) {
  if (suite == "knapsack") return knapsack_suite(options);
  if (suite == "flat_equivalence") return flat_suite(options);
  if (suite == "partial") return partial_suite(options);
  if (suite == "quadrature") return quadrature_suite(options);
  throw std::invalid_argument("unknown verification suite '" + suite + "'");
}

}  // namespace procache
