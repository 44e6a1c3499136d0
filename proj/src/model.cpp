#include "procache/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace procache {

double ObjectRequest::probability(CacheId leaf) const {
  auto it = trans_probs.find(leaf);
  return it == trans_probs.end() ? 0.0 : it->second;
}

void ObjectRequest::validate() const {
  if (size <= 0) throw std::invalid_argument("request " + std::to_string(id) + ": size must be positive");
  if (!(popularity >= 0.0))
    throw std::invalid_argument("request " + std::to_string(id) + ": popularity must be nonnegative");
  double total = 0.0;
  for (const auto& [leaf, q] : trans_probs) {
    if (!(q >= 0.0 && q <= 1.0))
      throw std::invalid_argument("request " + std::to_string(id) + ": probability outside [0,1]");
    total += q;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("request " + std::to_string(id) + ": probabilities sum to " +
                                std::to_string(total));
}

CacheNode::CacheNode(CacheId id, CacheLevel level, Storage capacity, double gamma,
                     std::optional<CacheId> parent, double initial_price)
    : id_(id), level_(level), parent_(parent), capacity_(capacity), price_(initial_price), gamma_(gamma) {
  if (capacity < 0) throw std::invalid_argument("cache capacity must be nonnegative");
  if (!(gamma > 0.0)) throw std::invalid_argument("price update factor must be positive");
  if (!(initial_price >= 0.0)) throw std::invalid_argument("initial price must be nonnegative");
  if (level == CacheLevel::Mid && parent) throw StructuralError("a mid-level cache has no parent");
}

void CacheNode::admit(RequestId request, Storage amount) {
  if (amount <= 0) throw std::logic_error("admitted amount must be positive");
  if (!fits(amount)) throw std::logic_error("cache " + std::to_string(id_) + " has no room");
  if (!cached_.emplace(request, amount).second)
    throw std::logic_error("request " + std::to_string(request) + " already cached");
  occupied_ += amount;
}

Storage CacheNode::release(RequestId request) {
  auto it = cached_.find(request);
  if (it == cached_.end()) return 0;
  Storage freed = it->second;
  occupied_ -= freed;
  cached_.erase(it);
  return freed;
}

void CacheNode::clear() {
  cached_.clear();
  occupied_ = 0;
}

void CacheNode::set_price(double price) {
  if (!(price >= 0.0)) throw std::invalid_argument("congestion price must be nonnegative");
  price_ = price;
}

void DelayOverrides::set(RequestId request, CacheId cache, double delay) {
  auto& entries = by_request_[request];
  for (auto& [c, d] : entries)
    if (c == cache) {
      d = delay;
      return;
    }
  entries.emplace_back(cache, delay);
}

const double* DelayOverrides::find(RequestId request, CacheId cache) const {
  auto it = by_request_.find(request);
  if (it == by_request_.end()) return nullptr;
  for (const auto& [c, d] : it->second)
    if (c == cache) return &d;
  return nullptr;
}

double SizeIndependentDelays::remote_for(RequestId request, CacheId cache) const {
  const double* d = remote_overrides.find(request, cache);
  return d ? *d : remote;
}

double SizeIndependentDelays::local_for(RequestId request, CacheId cache) const {
  if (local_overrides.empty()) return local;
  const double* d = local_overrides.find(request, cache);
  return d ? *d : local;
}

double SizeIndependentDelays::mid_for(RequestId request, CacheId cache) const {
  return std::min(mid, remote_for(request, cache));
}

const SizeIndependentDelays& DelayModel::delays() const {
  if (auto* d = std::get_if<SizeIndependentDelays>(&kind)) return *d;
  throw std::logic_error("delay model is rate-based");
}

const SizeDependentRates& DelayModel::rates() const {
  if (auto* r = std::get_if<SizeDependentRates>(&kind)) return *r;
  throw std::logic_error("delay model is size-independent");
}

void DelayModel::validate(bool has_mid) const {
  if (auto* d = std::get_if<SizeIndependentDelays>(&kind)) {
    bool ordered = has_mid ? (d->local < d->mid && d->mid < d->remote) : (d->local < d->remote);
    if (!ordered || d->local < 0) throw std::invalid_argument("delays must satisfy D_L < D_M < D_R");
    return;
  }
  const auto& r = std::get<SizeDependentRates>(kind);
  if (!(r.rate_remote > 0.0 && r.rate_remote < r.rate_local))
    throw std::invalid_argument("rates must satisfy 0 < R_R < R_L");
}

void UtilitySpec::validate() const {
  if (!(min_amount >= 0.0 && min_amount < max_amount && max_amount <= object_size))
    throw std::invalid_argument("utility bounds must satisfy 0 <= m < M <= o");
  if (!(rate_remote > 0.0 && rate_remote < rate_local))
    throw std::invalid_argument("utility rates must satisfy 0 < R_R < R_L");
  if (shape == UtilityShape::Sigmoid && !(steepness > 0.0))
    throw std::invalid_argument("sigmoid steepness must be positive");
}

Hierarchy Hierarchy::flat(CacheId leaf_count) {
  Hierarchy h;
  for (CacheId l = 0; l < leaf_count; ++l) h.leaves[l] = std::nullopt;
  return h;
}

Hierarchy Hierarchy::two_level(CacheId leaf_count, CacheId mid_id) {
  Hierarchy h;
  for (CacheId l = 0; l < leaf_count; ++l) h.leaves[l] = mid_id;
  h.mid = mid_id;
  return h;
}

bool Hierarchy::knows(CacheId cache) const { return leaves.count(cache) != 0 || (mid && *mid == cache); }

namespace {

bool is_cached(const std::map<CacheId, Decision>& placements, CacheId cache) {
  auto it = placements.find(cache);
  return it != placements.end() && it->second.cached();
}

}  // namespace

double expected_delay(const ObjectRequest& request, const std::map<CacheId, Decision>& placements,
                      const Hierarchy& hierarchy, const DelayModel& model) {
  for (const auto& [cache, decision] : placements) {
    if (!hierarchy.knows(cache)) throw StructuralError("placement refers to unknown cache " + std::to_string(cache));
    (void)decision;
  }
  double total = 0.0;
  for (const auto& [leaf, q] : request.trans_probs) {
    if (q <= 0.0) continue;
    auto parent_it = hierarchy.leaves.find(leaf);
    if (parent_it == hierarchy.leaves.end())
      throw StructuralError("request refers to unknown leaf " + std::to_string(leaf));
    auto placed = placements.find(leaf);
    if (placed == placements.end())
      throw StructuralError("no placement given for leaf " + std::to_string(leaf));

    const auto& parent = parent_it->second;
    if (model.size_independent()) {
      const auto& d = model.delays();
      double delay = d.remote_for(request.id, leaf);
      if (placed->second.cached())
        delay = d.local_for(request.id, leaf);
      else if (parent && is_cached(placements, *parent))
        delay = d.mid_for(request.id, leaf);
      total += q * delay;
    } else {
      const auto& r = model.rates();
      const double o = static_cast<double>(request.size);
      double x = 0.0;
      if (placed->second.action == Action::Full) x = o;
      if (placed->second.action == Action::Partial) x = placed->second.amount;
      total += q * (x / r.rate_local + (o - x) / r.rate_remote);
    }
  }
  return total;
}

double gain(double avg_delay_scheme, double avg_delay_nocache) {
  if (avg_delay_scheme < 0.0 || avg_delay_nocache < 0.0) throw std::invalid_argument("delays must be nonnegative");
  if (!(avg_delay_nocache > 0.0)) throw std::invalid_argument("no-cache delay must be positive");
  if (avg_delay_scheme > avg_delay_nocache * (1.0 + 1e-12))
    throw std::invalid_argument("scheme delay exceeds the no-cache delay");
  return std::max(0.0, 1.0 - avg_delay_scheme / avg_delay_nocache);
}

}  // namespace procache
