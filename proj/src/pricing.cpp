#include "procache/pricing.hpp"

#include <algorithm>
#include <stdexcept>

namespace procache {

namespace {

double step(const PriceState& state, double demand) {
  if (demand < 0.0) throw std::invalid_argument("aggregate demand must be nonnegative");
  return std::max(0.0, state.price + state.gamma * (demand - state.capacity));
}

}  // namespace

double update_price_full(const PriceState& state, double aggregate_demand) { return step(state, aggregate_demand); }

double update_price_partial(const PriceState& state, double aggregate_partial_demand) {
  return step(state, aggregate_partial_demand);
}

double measure_demand(const CacheNode& cache, std::span<const Decision> would_cache,
                      std::span<const Storage> sizes) {
  if (would_cache.size() != sizes.size()) throw std::invalid_argument("decision and size lists differ in length");
  double demand = static_cast<double>(cache.occupied());
  for (std::size_t i = 0; i < would_cache.size(); ++i) {
    const auto& d = would_cache[i];
    if (d.cache != cache.id() || !d.cached()) continue;
    demand += d.action == Action::Partial ? d.amount : static_cast<double>(sizes[i]);
  }
  return demand;
}

void reprice(CacheNode& cache, double aggregate_demand) {
  cache.set_price(update_price_full(PriceState::of(cache), aggregate_demand));
}

}  // namespace procache
