#pragma once

// Congestion-price dynamics p <- [p + gamma (demand - B)]^+ shared by
// full-object and partial-object caching.

#include <span>

#include "procache/model.hpp"

namespace procache {

struct PriceState {
  double price = 0.0;
  double gamma = 0.5;
  double capacity = 0.0;

  static PriceState of(const CacheNode& cache) {
    return {cache.price(), cache.gamma(), static_cast<double>(cache.capacity())};
  }
};

/// One step of the full-object price update; `aggregate_demand` is o * b(t)
/// in storage units.
double update_price_full(const PriceState& state, double aggregate_demand);

/// Same dynamics with the continuous demand sum_s x_s.
double update_price_partial(const PriceState& state, double aggregate_partial_demand);

/// Committed occupancy plus the storage this decision round would admit at
/// the current price. Only Full decisions for this cache count; admission
/// (not demand) is what the capacity caps.
double measure_demand(const CacheNode& cache, std::span<const Decision> would_cache,
                      std::span<const Storage> sizes);

/// Applies the full-object update to the cache's stored price.
void reprice(CacheNode& cache, double aggregate_demand);

}  // namespace procache
