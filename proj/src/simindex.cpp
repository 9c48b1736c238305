#include "masq/simindex.hpp"

#include <algorithm>
#include <cstdlib>
#include <queue>
#include <unordered_set>

namespace masq {
namespace {

thread_local std::size_t g_visits = 0;

bool by_distance_then_id(const Neighbor& a, const Neighbor& b) {
  return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
}

int lower_bound_for(int probe_to_vantage, int lo, int hi) {
  return std::max({lo - probe_to_vantage, probe_to_vantage - hi, 0});
}

}  // namespace

int pruning_metric(const Digest& a, const Digest& b, LengthTerm length) {
  int m = a.checksum != b.checksum ? 1 : 0;
  if (length == LengthTerm::Include) m += detail::ring_diff(a.lvalue, b.lvalue, 256);
  m += detail::ring_diff(a.q1ratio, b.q1ratio, 16);
  m += detail::ring_diff(a.q2ratio, b.q2ratio, 16);
  for (std::size_t i = 0; i < kBucketCount; ++i) m += std::abs(a.body[i] - b.body[i]);
  return m;
}

VpIndex::VpIndex(std::vector<std::pair<ItemId, Digest>> items, LengthTerm length)
    : items_(std::move(items)), length_(length) {
  std::unordered_set<ItemId> seen;
  seen.reserve(items_.size());
  for (const auto& [id, digest] : items_) {
    if (!seen.insert(id).second) {
      throw IndexError("duplicate item id " + std::to_string(id));
    }
    if (digest.version != items_.front().second.version) {
      throw DigestError(DigestErrc::VersionMismatch, "index items mix digest versions");
    }
  }
  std::vector<std::uint32_t> order(items_.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  nodes_.reserve(items_.size());
  root_ = build(order, 0, order.size());
}

// `order[begin, end)` is kept in input order on entry so the vantage is the
// earliest item of the partition.
std::int32_t VpIndex::build(std::vector<std::uint32_t>& order, std::size_t begin,
                            std::size_t end) {
  if (begin == end) return -1;
  const auto node_index = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back().item = order[begin];
  const std::size_t rest = begin + 1;
  if (rest == end) return node_index;

  const Digest& vantage = items_[order[begin]].second;
  std::vector<std::pair<int, std::uint32_t>> scored;
  scored.reserve(end - rest);
  for (std::size_t i = rest; i < end; ++i) {
    scored.emplace_back(pruning_metric(vantage, items_[order[i]].second, length_), order[i]);
  }
  std::sort(scored.begin(), scored.end());

  const std::size_t inside_count = (scored.size() + 1) / 2;
  Range inside{scored.front().first, scored[inside_count - 1].first};
  Range outside;
  if (inside_count < scored.size()) outside = {scored[inside_count].first, scored.back().first};

  for (std::size_t i = 0; i < scored.size(); ++i) order[rest + i] = scored[i].second;
  const std::size_t split = rest + inside_count;
  std::sort(order.begin() + static_cast<std::ptrdiff_t>(rest),
            order.begin() + static_cast<std::ptrdiff_t>(split));
  std::sort(order.begin() + static_cast<std::ptrdiff_t>(split),
            order.begin() + static_cast<std::ptrdiff_t>(end));

  const auto in_child = build(order, rest, split);
  const auto out_child = build(order, split, end);
  Node& node = nodes_[static_cast<std::size_t>(node_index)];
  node.inside = inside;
  node.outside = outside;
  node.inside_child = in_child;
  node.outside_child = out_child;
  return node_index;
}

std::vector<Neighbor> VpIndex::query_radius(const Digest& probe, int radius) const {
  g_visits = 0;
  std::vector<Neighbor> out;
  if (root_ < 0 || radius < 0) return out;

  std::vector<std::int32_t> stack{root_};
  while (!stack.empty()) {
    const Node& node = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    ++g_visits;
    const auto& [id, digest] = items_[node.item];
    const int d = distance(probe, digest, length_);
    if (d <= radius) out.push_back({id, d});

    const int m = pruning_metric(probe, digest, length_);
    if (node.outside_child >= 0 &&
        lower_bound_for(m, node.outside.lo, node.outside.hi) <= radius) {
      stack.push_back(node.outside_child);
    }
    if (node.inside_child >= 0 &&
        lower_bound_for(m, node.inside.lo, node.inside.hi) <= radius) {
      stack.push_back(node.inside_child);
    }
  }
  std::sort(out.begin(), out.end(), by_distance_then_id);
  return out;
}

std::vector<Neighbor> VpIndex::query_nearest(const Digest& probe, std::size_t k) const {
  g_visits = 0;
  if (root_ < 0 || k == 0) return {};

  // Max-heap on (distance, id) holding the best k so far.
  std::priority_queue<Neighbor, std::vector<Neighbor>, decltype(&by_distance_then_id)> best(
      by_distance_then_id);
  // Min-heap of pending subtrees keyed by their lower bound.
  using Pending = std::pair<int, std::int32_t>;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> pending;
  pending.emplace(0, root_);

  while (!pending.empty()) {
    const auto [bound, index] = pending.top();
    pending.pop();
    // Ties must still be explored so the id tie-break is honoured.
    if (best.size() == k && bound > best.top().distance) break;

    const Node& node = nodes_[static_cast<std::size_t>(index)];
    ++g_visits;
    const auto& [id, digest] = items_[node.item];
    const Neighbor candidate{id, distance(probe, digest, length_)};
    if (best.size() < k) {
      best.push(candidate);
    } else if (by_distance_then_id(candidate, best.top())) {
      best.pop();
      best.push(candidate);
    }

    const int m = pruning_metric(probe, digest, length_);
    if (node.inside_child >= 0) {
      pending.emplace(lower_bound_for(m, node.inside.lo, node.inside.hi), node.inside_child);
    }
    if (node.outside_child >= 0) {
      pending.emplace(lower_bound_for(m, node.outside.lo, node.outside.hi), node.outside_child);
    }
  }

  std::vector<Neighbor> out;
  out.reserve(best.size());
  while (!best.empty()) {
    out.push_back(best.top());
    best.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::size_t VpIndex::last_visit_count() noexcept { return g_visits; }

}  // namespace masq
