#include "procache/partial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "procache/pricing.hpp"

namespace procache {

double transfer_delay(double cached, double object_size, double rate_local, double rate_remote) {
  if (cached < 0.0 || cached > object_size) throw std::invalid_argument("cached amount outside [0, o]");
  if (!(rate_remote > 0.0 && rate_remote < rate_local)) throw std::invalid_argument("rates must satisfy 0 < R_R < R_L");
  return object_size / rate_remote - (1.0 / rate_remote - 1.0 / rate_local) * cached;
}

namespace {

double clamp_amount(const UtilitySpec& spec, double x) { return std::clamp(x, spec.min_amount, spec.max_amount); }

double sigmoid_of_delay(const UtilitySpec& spec, double delay, double q) {
  return 1.0 / (1.0 + std::exp(spec.steepness * (delay / q - spec.midpoint)));
}

}  // namespace

double utility_value(const UtilitySpec& spec, double cached, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("utility undefined for zero transition probability");
  const double x = clamp_amount(spec, cached);
  if (spec.shape == UtilityShape::Linear) return spec.slope() / q * (x - spec.min_amount);
  const double delay = transfer_delay(x, spec.object_size, spec.rate_local, spec.rate_remote);
  return sigmoid_of_delay(spec, delay, q);
}

double utility_inverse(const UtilitySpec& spec, double u, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("utility undefined for zero transition probability");
  const double lo_u = utility_value(spec, spec.min_amount, q);
  const double hi_u = utility_value(spec, spec.max_amount, q);
  if (u <= lo_u) return spec.min_amount;
  if (u >= hi_u) return spec.max_amount;
  if (spec.shape == UtilityShape::Linear) return spec.min_amount + q * u / spec.slope();

  double lo = spec.min_amount;
  double hi = spec.max_amount;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (utility_value(spec, mid, q) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double partial_decide(const UtilitySpec& spec, double q, double price) {
  if (price < 0.0) throw std::invalid_argument("price must be nonnegative");
  if (price == 0.0) return spec.max_amount;
  const double u_max = utility_value(spec, spec.max_amount, q);
  const double u_min = utility_value(spec, spec.min_amount, q);
  if (price <= 1.0 / u_max) return spec.max_amount;
  if (u_min > 0.0 && 1.0 / u_min <= price) return spec.min_amount;
  return utility_inverse(spec, 1.0 / price, q);
}

double vs_quadrature(const UtilitySpec& spec, double lower, double upper, double q) {
  auto integrand = [&](double y) { return 1.0 / utility_value(spec, y, q); };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lower, upper, 10, 1e-11);
}

double vs_objective(const UtilitySpec& spec, double cached, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("utility undefined for zero transition probability");
  if (spec.shape == UtilityShape::Linear) {
    if (cached <= spec.min_amount) return -std::numeric_limits<double>::infinity();
    return q / spec.slope() * std::log(cached - spec.min_amount);
  }
  if (cached <= spec.min_amount) return 0.0;
  return vs_quadrature(spec, spec.min_amount, cached, q);
}

double PartialAllocation::total() const {
  double sum = 0.0;
  for (const auto& [id, x] : amounts) sum += x;
  return sum;
}

namespace {

const PartialRequest& find_request(std::span<const PartialRequest> requests, RequestId id) {
  for (const auto& r : requests)
    if (r.id == id) return r;
  throw StructuralError("allocation refers to unknown request " + std::to_string(id));
}

}  // namespace

PartialAllocation cap_to_capacity(const PartialAllocation& alloc, std::span<const PartialRequest> requests,
                                  double capacity) {
  const double total = alloc.total();
  if (total <= capacity) return alloc;
  double floor_total = 0.0;
  for (const auto& [id, x] : alloc.amounts) floor_total += find_request(requests, id).utility.min_amount;
  const double factor = floor_total >= capacity ? 0.0 : (capacity - floor_total) / (total - floor_total);
  PartialAllocation capped;
  for (const auto& [id, x] : alloc.amounts) {
    const double m = find_request(requests, id).utility.min_amount;
    capped.amounts[id] = m + (x - m) * factor;
  }
  return capped;
}

double fairness_check(const PartialAllocation& optimal, const PartialAllocation& candidate,
                      std::span<const PartialRequest> requests, double capacity) {
  constexpr double slack = 1e-9;
  if (candidate.total() > capacity + slack) throw std::invalid_argument("candidate allocation exceeds capacity");
  double sum = 0.0;
  for (const auto& r : requests) {
    auto opt = optimal.amounts.find(r.id);
    auto cand = candidate.amounts.find(r.id);
    if (opt == optimal.amounts.end() || cand == candidate.amounts.end())
      throw StructuralError("allocations do not cover request " + std::to_string(r.id));
    const double x = cand->second;
    if (x < r.utility.min_amount - slack || x > r.utility.max_amount + slack)
      throw std::invalid_argument("candidate amount outside [m, M]");
    const double u = utility_value(r.utility, opt->second, r.q);
    if (!(u > 0.0)) throw std::invalid_argument("optimal allocation sits at zero utility");
    sum += (x - opt->second) / u;
  }
  return sum;
}

double total_objective(const PartialAllocation& alloc, std::span<const PartialRequest> requests) {
  double sum = 0.0;
  for (const auto& r : requests) {
    auto it = alloc.amounts.find(r.id);
    if (it == alloc.amounts.end()) throw StructuralError("allocation misses request " + std::to_string(r.id));
    sum += vs_objective(r.utility, it->second, r.q);
  }
  return sum;
}

PartialEquilibrium converge_partial(std::span<const PartialRequest> requests, double capacity,
                                    const PartialLoopOptions& options) {
  PartialEquilibrium eq;
  PriceState state{options.initial_price, options.gamma, capacity};
  int stable = 0;
  for (const auto& r : requests) {
    if (!(r.q > 0.0)) throw std::invalid_argument("zero-probability requests do not belong to this cache");
    r.utility.validate();
  }
  auto allocate = [&](double price) {
    PartialAllocation a;
    for (const auto& r : requests) a.amounts[r.id] = partial_decide(r.utility, r.q, price);
    return a;
  };

  for (eq.iterations = 0; eq.iterations < options.max_iterations; ++eq.iterations) {
    const double demand = allocate(state.price).total();
    const double next = update_price_partial(state, demand);
    stable = std::abs(next - state.price) < options.tolerance ? stable + 1 : 0;
    state.price = next;
    if (stable >= options.stable_window) {
      eq.converged = true;
      break;
    }
  }
  eq.price = state.price;
  eq.allocation = cap_to_capacity(allocate(state.price), requests, capacity);
  return eq;
}

}  // namespace procache
