#pragma once

// In-memory R-tree over points. Nodes live in an arena and are addressed by
// index; one node stands for one disk block.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rasp/codec.h"
#include "rasp/mbr.h"

namespace rasp {

inline constexpr std::size_t kDefaultNodeCapacity = 20;

enum class SplitPolicy : std::uint8_t {
  kQuadratic = 0,  // Guttman: least-enlargement descent, quadratic split
  kRStar = 1,      // overlap-aware descent, margin/overlap split
};

// Simulated block reads: internal nodes are index blocks, leaves hold the
// record entries and are data blocks.
struct BlockCounter {
  std::uint64_t index_blocks = 0;
  std::uint64_t data_blocks = 0;

  std::uint64_t total() const noexcept { return index_blocks + data_blocks; }
  BlockCounter& operator+=(const BlockCounter& o) {
    index_blocks += o.index_blocks;
    data_blocks += o.data_blocks;
    return *this;
  }
  friend bool operator==(const BlockCounter&, const BlockCounter&) = default;
};

class RTree {
 public:
  using NodeId = std::uint32_t;
  using EntryId = std::uint32_t;

  struct Node {
    Mbr mbr;
    bool leaf = true;
    std::vector<std::uint32_t> children;  // node ids, or entry ids in a leaf
  };

  RTree() = default;
  RTree(std::size_t dims, std::size_t capacity = kDefaultNodeCapacity,
        SplitPolicy policy = SplitPolicy::kRStar);

  // Entry ids must be 0, 1, 2, ... in insertion order.
  EntryId insert(std::span<const double> point);

  // Calls visit(entry) for every point inside box (closed bounds).
  void search(const Mbr& box, const std::function<void(EntryId)>& visit,
              BlockCounter& counter) const;

  std::size_t dimensions() const noexcept { return dims_; }
  std::size_t capacity() const noexcept { return capacity_; }
  SplitPolicy policy() const noexcept { return policy_; }
  std::size_t size() const noexcept { return dims_ == 0 ? 0 : points_.size() / dims_; }
  bool empty() const noexcept { return size() == 0; }
  std::size_t height() const;
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t leaf_count() const;
  std::span<const double> point(EntryId e) const { return {points_.data() + e * dims_, dims_}; }
  const Node& node(NodeId id) const { return nodes_[id]; }
  NodeId root() const noexcept { return root_; }

  // Structural audit: every node MBR equals the hull of its children, fan-out
  // within capacity, leaves on one level, every entry reachable exactly once.
  // Returns a description of the first problem found.
  std::optional<std::string> audit() const;

  void write(ByteWriter& w) const;
  // points are the flat entry coordinates the tree was built over.
  static RTree read(ByteReader& r, std::vector<double> points);

 private:
  struct Pending {
    std::uint32_t id;    // entry id, or node id for an evicted subtree
    Mbr box;
    std::size_t level;   // level of the node it must be stored in (leaves = 0)
  };
  void place(const Pending& item, std::vector<bool>& reinserted, std::vector<Pending>& queue);
  void evict_far_children(NodeId node, std::size_t node_level, std::vector<Pending>& queue);
  NodeId choose_child(NodeId node, const Mbr& box) const;
  NodeId split(NodeId node);
  std::vector<int> quadratic_groups(const std::vector<Mbr>& boxes) const;
  std::vector<int> rstar_groups(const std::vector<Mbr>& boxes) const;
  std::size_t min_fill() const noexcept;
  Mbr child_mbr(const Node& n, std::size_t i) const;
  Mbr hull(const Node& n) const;

  std::size_t dims_ = 0;
  std::size_t capacity_ = kDefaultNodeCapacity;
  SplitPolicy policy_ = SplitPolicy::kRStar;
  std::vector<double> points_;
  std::vector<Node> nodes_;
  NodeId root_ = 0;
};

}  // namespace rasp
