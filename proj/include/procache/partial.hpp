#pragma once

// Partial prefetching when transfer delay grows with object size: utility
// inversion picks how much of an object to prefetch at a cache, and the
// congestion price steers the aggregate towards the cache capacity.

#include <map>
#include <span>

#include "procache/model.hpp"

namespace procache {

/// D(x) = o/R_R - (1/R_R - 1/R_L) x. Throws for x outside [0, o].
double transfer_delay(double cached, double object_size, double rate_local, double rate_remote);

/// U(x) for one cache, where q is the probability of attaching there.
/// Held constant outside [m, M]. Throws for q <= 0.
double utility_value(const UtilitySpec& spec, double cached, double q);

/// Inverse of U on [m, M]: closed form for the linear shape, bisection to
/// 1e-9 for the sigmoid. `u` must lie within [U(m), U(M)].
double utility_inverse(const UtilitySpec& spec, double u, double q);

/// Amount to prefetch at the given price:
///   m           if 1/U(m) <= p
///   U^-1(1/p)   if 1/U(M) < p < 1/U(m)
///   M           if p <= 1/U(M)   (including p = 0)
double partial_decide(const UtilitySpec& spec, double q, double price);

/// V(x) = integral of 1/U. For the linear shape the closed form
/// (q/R) log(x - m) is used; for the sigmoid the integral from m is computed
/// numerically. Returns -infinity for x <= m under the linear shape.
double vs_objective(const UtilitySpec& spec, double cached, double q);

/// Numerical integral of 1/U(y) over [lower, upper].
double vs_quadrature(const UtilitySpec& spec, double lower, double upper, double q);

struct PartialRequest {
  RequestId id = 0;
  UtilitySpec utility;
  double q = 1.0;
};

struct PartialAllocation {
  std::map<RequestId, double> amounts;

  double total() const;
};

/// Scales each x_s towards its minimum m_s by a common factor so the total
/// does not exceed the capacity.
PartialAllocation cap_to_capacity(const PartialAllocation& alloc, std::span<const PartialRequest> requests,
                                  double capacity);

/// sum_s (x_s - x*_s) / U(x*_s). Throws std::invalid_argument when the
/// candidate leaves [m, M] or exceeds the capacity.
double fairness_check(const PartialAllocation& optimal, const PartialAllocation& candidate,
                      std::span<const PartialRequest> requests, double capacity);

/// Sum of V_s over an allocation.
double total_objective(const PartialAllocation& alloc, std::span<const PartialRequest> requests);

struct PartialEquilibrium {
  PartialAllocation allocation;
  double price = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct PartialLoopOptions {
  double gamma = 0.01;
  double initial_price = 0.0;
  int max_iterations = 2'000'000;
  /// Converged once the price moves less than this for `stable_window`
  /// consecutive iterations.
  double tolerance = 1e-12;
  int stable_window = 100;
};

/// Iterates partial_decide at one cache and the partial price update until
/// the price settles, then caps the final allocation to the capacity.
PartialEquilibrium converge_partial(std::span<const PartialRequest> requests, double capacity,
                                    const PartialLoopOptions& options = {});

}  // namespace procache
