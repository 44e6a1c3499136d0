#pragma once

#include <map>
#include <optional>
#include <random>
#include <vector>

#include "procache/model.hpp"

namespace testing_support {

using namespace procache;

inline ObjectRequest request(RequestId id, std::map<CacheId, double> probs, Storage size = 1,
                             std::uint64_t issued = 0) {
  ObjectRequest r;
  r.id = id;
  r.mobile = id;
  r.size = size;
  r.trans_probs = std::move(probs);
  r.issued_at = issued;
  return r;
}

inline DelayModel delays(double local, double mid, double remote) {
  SizeIndependentDelays d;
  d.local = local;
  d.mid = mid;
  d.remote = remote;
  return DelayModel{d};
}

inline std::vector<CacheNode> flat_leaves(std::vector<Storage> capacities, double gamma = 0.5) {
  std::vector<CacheNode> out;
  for (CacheId l = 0; l < capacities.size(); ++l) out.emplace_back(l, CacheLevel::Leaf, capacities[l], gamma);
  return out;
}

/// Leaves 0..n-1 under a mid cache with id n; the mid cache is returned last.
inline std::vector<CacheNode> two_level(std::vector<Storage> leaf_capacities, Storage mid_capacity,
                                        double gamma = 0.5) {
  const auto mid = static_cast<CacheId>(leaf_capacities.size());
  std::vector<CacheNode> out;
  for (CacheId l = 0; l < mid; ++l) out.emplace_back(l, CacheLevel::Leaf, leaf_capacities[l], gamma, mid);
  out.emplace_back(mid, CacheLevel::Mid, mid_capacity, gamma);
  return out;
}

inline std::map<CacheId, double> random_probs(std::size_t n, std::mt19937_64& rng) {
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& x : w) total += (x = std::uniform_real_distribution<double>(0.01, 1.0)(rng));
  std::map<CacheId, double> out;
  double acc = 0.0;
  for (CacheId l = 0; l < n; ++l) {
    out[l] = l + 1 == n ? 1.0 - acc : w[l] / total;
    acc += out[l];
  }
  return out;
}

}  // namespace testing_support
