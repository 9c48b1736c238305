#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "masq/digest.hpp"

namespace masq {

using ItemId = std::uint64_t;

struct Neighbor {
  ItemId id = 0;
  int distance = 0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

class IndexError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Metric used for tree pruning. Each header component of `distance` is
/// replaced by its unweighted ring difference and the body by plain L1, so
/// this is a true metric and never exceeds `distance` under the same
/// length mode.
int pruning_metric(const Digest& a, const Digest& b, LengthTerm length = LengthTerm::Include);

/// Exact vantage-point tree over digests.
///
/// The digest distance does not obey the triangle inequality, so subtrees
/// are pruned with `pruning_metric`, which lower-bounds it. Queries therefore
/// return exactly what a linear scan would.
class VpIndex {
 public:
  VpIndex() = default;
  /// Throws IndexError when an id repeats.
  explicit VpIndex(std::vector<std::pair<ItemId, Digest>> items,
                   LengthTerm length = LengthTerm::Include);

  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  LengthTerm length_term() const noexcept { return length_; }
  const std::vector<std::pair<ItemId, Digest>>& items() const noexcept { return items_; }

  /// Items with distance <= radius, ascending by (distance, id).
  std::vector<Neighbor> query_radius(const Digest& probe, int radius) const;
  /// The k nearest items, ascending by (distance, id).
  std::vector<Neighbor> query_nearest(const Digest& probe, std::size_t k) const;

  /// Number of vertices visited by the last query on this thread; used by
  /// tests to confirm pruning happens.
  static std::size_t last_visit_count() noexcept;

 private:
  struct Range {
    int lo = 0;
    int hi = -1;  // empty when hi < lo
  };
  struct Node {
    std::uint32_t item = 0;
    Range inside, outside;
    std::int32_t inside_child = -1;
    std::int32_t outside_child = -1;
  };

  std::int32_t build(std::vector<std::uint32_t>& order, std::size_t begin, std::size_t end);

  std::vector<std::pair<ItemId, Digest>> items_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
  LengthTerm length_ = LengthTerm::Include;
};

inline VpIndex build_index(std::vector<std::pair<ItemId, Digest>> items,
                           LengthTerm length = LengthTerm::Include) {
  return VpIndex(std::move(items), length);
}

inline std::vector<Neighbor> query_radius(const VpIndex& index, const Digest& probe, int radius) {
  return index.query_radius(probe, radius);
}

inline std::vector<Neighbor> query_nearest(const VpIndex& index, const Digest& probe,
                                           std::size_t k) {
  return index.query_nearest(probe, k);
}

}  // namespace masq
