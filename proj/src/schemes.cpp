#include "procache/schemes.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace procache {

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::EPC: return "epc";
    case SchemeKind::Naive: return "naive";
    case SchemeKind::Oracle: return "oracle";
    case SchemeKind::Optimal: return "optimal";
  }
  return "unknown";
}

SchemeKind parse_scheme(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "epc") return SchemeKind::EPC;
  if (lower == "naive") return SchemeKind::Naive;
  if (lower == "oracle") return SchemeKind::Oracle;
  if (lower == "optimal") return SchemeKind::Optimal;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

Decision epc_decide_flat(const ObjectRequest& request, const CacheNode& cache, const DelayModel& model) {
  const auto& d = model.delays();
  const double saving = d.remote_for(request.id, cache.id()) - d.local_for(request.id, cache.id());
  const bool admit = epc_rule(request.weight(cache.id()), saving, request.size, cache.price()) && cache.fits(request.size);
  return {request.id, cache.id(), admit ? Action::Full : Action::Skip, 0.0};
}

Decision naive_decide(const ObjectRequest& request, const CacheNode& cache) {
  return {request.id, cache.id(), cache.fits(request.size) ? Action::Full : Action::Skip, 0.0};
}

std::vector<Decision> oracle_decide(const ObjectRequest& request, CacheId destination,
                                    std::span<const CacheNode> caches) {
  std::vector<Decision> out;
  out.reserve(caches.size());
  const CacheNode* dest = nullptr;
  for (const auto& c : caches) {
    out.push_back({request.id, c.id(), Action::Skip, 0.0});
    if (c.id() == destination) dest = &c;
  }
  if (dest == nullptr || dest->level() != CacheLevel::Leaf)
    throw StructuralError("oracle destination " + std::to_string(destination) + " is not a known leaf");

  CacheId chosen = destination;
  bool place = dest->fits(request.size);
  if (!place && dest->parent()) {
    for (const auto& c : caches) {
      if (c.id() == *dest->parent() && c.fits(request.size)) {
        chosen = c.id();
        place = true;
      }
    }
  }
  if (place) {
    for (auto& d : out)
      if (d.cache == chosen) d.action = Action::Full;
  }
  return out;
}

namespace {

struct Ranked {
  double key;
  std::uint64_t issued;
  RequestId id;
  Storage size;
};

// Decreasing key, then earliest issue, then lowest id (or the reverse order
// among ties when injecting a fault).
void rank(std::vector<Ranked>& v, bool reverse_ties = false) {
  std::sort(v.begin(), v.end(), [reverse_ties](const Ranked& a, const Ranked& b) {
    if (a.key != b.key) return a.key > b.key;
    if (reverse_ties) {
      if (a.issued != b.issued) return a.issued > b.issued;
      return a.id > b.id;
    }
    if (a.issued != b.issued) return a.issued < b.issued;
    return a.id < b.id;
  });
}

double leaf_saving(const SizeIndependentDelays& d, RequestId r, CacheId leaf) {
  return d.remote_for(r, leaf) - d.local_for(r, leaf);
}

}  // namespace

Allocation optimal_allocate_round(std::span<const ObjectRequest> requests, std::span<const CacheNode> caches,
                                  const DelayModel& model) {
  const auto& d = model.delays();
  Allocation result;
  if (requests.empty()) {
    for (const auto& c : caches) result[c.id()] = {};
    return result;
  }
  const Storage size = requests.front().size;
  for (const auto& r : requests)
    if (r.size != size) throw std::invalid_argument("optimal allocation needs equal-size objects");

  bool leaf_storage = false;
  bool mid_storage = false;
  for (const auto& c : caches) {
    if (c.capacity() <= 0) continue;
    (c.level() == CacheLevel::Leaf ? leaf_storage : mid_storage) = true;
  }
  if (leaf_storage && mid_storage)
    throw StructuralError("optimal allocation is defined for a single storage level only");

  for (const auto& c : caches) {
    auto& admitted = result[c.id()];
    const Storage slots = c.capacity() / size;
    if (slots <= 0) continue;
    std::vector<Ranked> ranked;
    ranked.reserve(requests.size());
    for (const auto& r : requests) {
      double key = 0.0;
      if (c.level() == CacheLevel::Leaf) {
        key = r.weight(c.id()) * leaf_saving(d, r.id, c.id());
      } else {
        for (const auto& [leaf, q] : r.trans_probs) {
          (void)q;
          key += r.weight(leaf) * (d.remote_for(r.id, leaf) - d.mid_for(r.id, leaf));
        }
      }
      ranked.push_back({key, r.issued_at, r.id, r.size});
    }
    rank(ranked);
    for (Storage i = 0; i < slots && i < static_cast<Storage>(ranked.size()); ++i) admitted.push_back(ranked[i].id);
  }
  return result;
}

KnapsackSolution knapsack_bruteforce(std::span<const KnapsackItem> items, Storage capacity) {
  if (items.size() > 20) throw std::invalid_argument("brute-force knapsack is limited to 20 items");
  const std::size_t n = items.size();
  KnapsackSolution best;
  bool have = false;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    Storage used = 0;
    double value = 0.0;
    std::vector<RequestId> ids;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        used += items[i].size;
        value += items[i].weight;
        ids.push_back(items[i].id);
      }
    }
    if (used > capacity) continue;
    std::sort(ids.begin(), ids.end());
    const double tol = 1e-12 * std::max(1.0, std::abs(best.value));
    if (!have || value > best.value + tol || (std::abs(value - best.value) <= tol && ids < best.chosen)) {
      best = {std::move(ids), value, used};
      have = true;
    }
  }
  return best;
}

KnapsackSolution greedy_density_admit(std::span<const KnapsackItem> items, Storage capacity) {
  std::vector<const KnapsackItem*> order;
  for (const auto& it : items) {
    if (it.size <= 0) throw std::invalid_argument("knapsack item sizes must be positive");
    order.push_back(&it);
  }
  std::sort(order.begin(), order.end(), [](const KnapsackItem* a, const KnapsackItem* b) {
    const double da = a->weight / static_cast<double>(a->size);
    const double db = b->weight / static_cast<double>(b->size);
    if (da != db) return da > db;
    return a->id < b->id;
  });

  KnapsackSolution greedy;
  const KnapsackItem* single = nullptr;
  for (const auto* it : order) {
    if (it->size <= capacity && (single == nullptr || it->weight > single->weight)) single = it;
    if (greedy.used + it->size > capacity) continue;
    greedy.used += it->size;
    greedy.value += it->weight;
    greedy.chosen.push_back(it->id);
  }
  std::sort(greedy.chosen.begin(), greedy.chosen.end());
  if (single != nullptr && single->weight > greedy.value) return {{single->id}, single->weight, single->size};
  return greedy;
}

Allocation epc_converge_flat(std::span<const ObjectRequest> requests, std::span<const CacheNode> caches,
                             const DelayModel& model, const EpcConvergeOptions& options) {
  const auto& d = model.delays();
  Allocation result;
  for (const auto& c : caches) {
    if (c.level() != CacheLevel::Leaf || c.parent())
      throw StructuralError("converged flat admission needs parentless leaf caches");
    auto& admitted = result[c.id()];

    std::vector<Ranked> ranked;
    for (const auto& r : requests)
      ranked.push_back({r.weight(c.id()) * leaf_saving(d, r.id, c.id()) / static_cast<double>(r.size), r.issued_at,
                        r.id, r.size});
    rank(ranked, options.reverse_tie_break);

    const double capacity = static_cast<double>(c.capacity());
    auto demand = [&](double p) {
      double total = 0.0;
      for (const auto& x : ranked)
        if (x.key >= p) total += static_cast<double>(x.size);
      return total;
    };

    double p = c.price();
    double step_scale = options.gamma;
    for (int k = 0; k < options.max_rounds; ++k) {
      const double excess = demand(p) - capacity;
      if (excess == 0.0 || (excess < 0.0 && p == 0.0)) break;
      step_scale = options.gamma / (1.0 + k / 100.0);
      p = std::max(0.0, p + step_scale * excess);
    }

    // Oscillation around a tied weight leaves the price just above it; the
    // tied group is admissible at the limit price.
    if (p > 0.0 && demand(p) < capacity) {
      double total = capacity;
      for (const auto& x : ranked) total += static_cast<double>(x.size);
      const double tol = step_scale * total;
      double below = 0.0;
      for (const auto& x : ranked)
        if (x.key < p) below = std::max(below, x.key);
      if (p - below <= tol) p = below;
    }

    Storage used = 0;
    for (const auto& x : ranked) {
      if (x.key < p || used + x.size > c.capacity()) continue;
      used += x.size;
      admitted.push_back(x.id);
    }
  }
  return result;
}

TwoLevelOutcome epc_two_level_round(const ObjectRequest& request, const CacheNode& mid,
                                    std::span<const CacheNode> leaves, const DelayModel& model) {
  const auto& d = model.delays();
  TwoLevelOutcome out;
  std::vector<bool> admit_remote, admit_mid, fits;
  admit_remote.reserve(leaves.size());
  admit_mid.reserve(leaves.size());
  fits.reserve(leaves.size());
  out.quotes.reserve(leaves.size());
  out.leaf_rule_admits.reserve(leaves.size());
  out.leaves.reserve(leaves.size());
  double total_remote = 0.0;
  double total_mid = 0.0;

  for (const auto& leaf : leaves) {
    if (leaf.parent() != mid.id())
      throw StructuralError("leaf " + std::to_string(leaf.id()) + " is not a child of mid cache " +
                            std::to_string(mid.id()));
    const double w = request.weight(leaf.id());
    const double q = request.probability(leaf.id());
    const double local = d.local_for(request.id, leaf.id());
    const double remote = d.remote_for(request.id, leaf.id());
    const double via_mid = d.mid_for(request.id, leaf.id());

    const bool rule_r = epc_rule(w, remote - local, request.size, leaf.price());
    const bool rule_m = epc_rule(w, via_mid - local, request.size, leaf.price());
    const bool room = leaf.fits(request.size);
    admit_remote.push_back(rule_r);
    admit_mid.push_back(rule_m);
    fits.push_back(room);

    TwoLevelQuote quote{leaf.id(), q * (rule_m && room ? local : via_mid), q * (rule_r && room ? local : remote)};
    total_remote += quote.delay_if_mid_not_cached;
    total_mid += quote.delay_if_mid_cached;
    out.quotes.push_back(quote);
  }

  out.mid_rule_admits = epc_rule(1.0, total_remote - total_mid, request.size, mid.price());
  const bool mid_full = out.mid_rule_admits && mid.fits(request.size);
  out.mid = {request.id, mid.id(), mid_full ? Action::Full : Action::Skip, 0.0};

  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const bool rule = mid_full ? admit_mid[i] : admit_remote[i];
    out.leaf_rule_admits.push_back(rule);
    out.leaves.push_back({request.id, leaves[i].id(), rule && fits[i] ? Action::Full : Action::Skip, 0.0});
  }
  return out;
}

bool epc_mid_rule_admits(const ObjectRequest& request, const CacheNode& mid, std::span<const CacheNode> leaves,
                         const DelayModel& model) {
  const auto& d = model.delays();
  double total_remote = 0.0;
  double total_mid = 0.0;
  for (const auto& leaf : leaves) {
    if (leaf.parent() != mid.id())
      throw StructuralError("leaf " + std::to_string(leaf.id()) + " is not a child of mid cache " +
                            std::to_string(mid.id()));
    const double w = request.weight(leaf.id());
    const double local = d.local_for(request.id, leaf.id());
    const double remote = d.remote_for(request.id, leaf.id());
    const double via_mid = d.mid_for(request.id, leaf.id());
    const double q = request.probability(leaf.id());
    const bool rule_r = epc_rule(w, remote - local, request.size, leaf.price());
    const bool rule_m = epc_rule(w, via_mid - local, request.size, leaf.price());
    const bool room = leaf.fits(request.size);
    total_remote += q * (rule_r && room ? local : remote);
    total_mid += q * (rule_m && room ? local : via_mid);
  }
  return epc_rule(1.0, total_remote - total_mid, request.size, mid.price());
}

}  // namespace procache
