#include "rasp/rtree.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rasp/error.h"

namespace rasp {

RTree::RTree(std::size_t dims, std::size_t capacity, SplitPolicy policy)
    : dims_(dims), capacity_(capacity), policy_(policy) {
  enforce(dims >= 1, ErrorCode::kInvalidArgument, "index needs at least one dimension");
  enforce(capacity >= 4, ErrorCode::kInvalidArgument, "node capacity must be at least 4");
  nodes_.push_back(Node{Mbr::empty(dims), true, {}});
}

Mbr RTree::child_mbr(const Node& n, std::size_t i) const {
  return n.leaf ? Mbr::point(point(n.children[i])) : nodes_[n.children[i]].mbr;
}

Mbr RTree::hull(const Node& n) const {
  Mbr h = Mbr::empty(dims_);
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    if (n.leaf)
      h.expand(point(n.children[i]));
    else
      h.expand(nodes_[n.children[i]].mbr);
  }
  return h;
}

RTree::EntryId RTree::insert(std::span<const double> p) {
  enforce(p.size() == dims_, ErrorCode::kInvalidArgument, "point dimensionality mismatch");
  enforce(std::all_of(p.begin(), p.end(), [](double v) { return std::isfinite(v); }),
          ErrorCode::kInvalidArgument, "cannot index non-finite coordinates");
  enforce(size() < std::numeric_limits<EntryId>::max(), ErrorCode::kInvalidArgument,
          "index is full");
  const auto entry = static_cast<EntryId>(size());
  points_.insert(points_.end(), p.begin(), p.end());

  // Forced reinsertion happens at most once per level per inserted point.
  std::vector<bool> reinserted(height() + 1, false);
  std::vector<Pending> queue{{entry, Mbr::point(p), 0}};
  while (!queue.empty()) {
    Pending item = std::move(queue.back());
    queue.pop_back();
    place(item, reinserted, queue);
  }
  return entry;
}

void RTree::place(const Pending& item, std::vector<bool>& reinserted,
                  std::vector<Pending>& queue) {
  // Descend to a node on the item's level, remembering the path.
  std::vector<NodeId> path{root_};
  std::size_t level = height() - 1;
  while (level > item.level) {
    path.push_back(choose_child(path.back(), item.box));
    --level;
  }
  nodes_[path.back()].children.push_back(item.id);
  for (NodeId id : path) nodes_[id].mbr.expand(item.box);

  for (std::size_t i = path.size(); i-- > 0;) {
    const NodeId id = path[i];
    if (nodes_[id].children.size() <= capacity_) break;
    const std::size_t node_level = item.level + (path.size() - 1 - i);
    if (reinserted.size() <= node_level) reinserted.resize(node_level + 1, false);
    if (policy_ == SplitPolicy::kRStar && i > 0 && !reinserted[node_level]) {
      reinserted[node_level] = true;
      evict_far_children(id, node_level, queue);
      for (std::size_t j = i + 1; j-- > 0;) nodes_[path[j]].mbr = hull(nodes_[path[j]]);
      break;
    }
    const NodeId sibling = split(id);
    if (i == 0) {
      Node top{Mbr::empty(dims_), false, {id, sibling}};
      top.mbr.expand(nodes_[id].mbr);
      top.mbr.expand(nodes_[sibling].mbr);
      nodes_.push_back(std::move(top));
      root_ = static_cast<NodeId>(nodes_.size() - 1);
    } else {
      nodes_[path[i - 1]].children.push_back(sibling);
    }
  }
}

// Removes the ~30% of children whose centers lie farthest from the node's
// center and queues them for insertion from the top.
void RTree::evict_far_children(NodeId id, std::size_t node_level, std::vector<Pending>& queue) {
  Node& n = nodes_[id];
  const std::size_t count = n.children.size();
  std::vector<double> center(dims_);
  for (std::size_t k = 0; k < dims_; ++k) center[k] = 0.5 * (n.mbr[k].lo + n.mbr[k].hi);
  std::vector<std::pair<double, std::size_t>> far(count);
  std::vector<Mbr> boxes(count);
  for (std::size_t i = 0; i < count; ++i) {
    boxes[i] = child_mbr(n, i);
    double dist = 0.0;
    for (std::size_t k = 0; k < dims_; ++k) {
      const double c = 0.5 * (boxes[i][k].lo + boxes[i][k].hi) - center[k];
      dist += c * c;
    }
    far[i] = {dist, i};
  }
  std::sort(far.begin(), far.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  const std::size_t evict = std::max<std::size_t>(1, (count * 3) / 10);
  std::vector<bool> gone(count, false);
  // Queue farthest last so the closest evicted child is reinserted first.
  for (std::size_t r = 0; r < evict; ++r) {
    const std::size_t i = far[r].second;
    gone[i] = true;
    queue.push_back({n.children[i], boxes[i], node_level});
  }
  std::vector<std::uint32_t> keep;
  for (std::size_t i = 0; i < count; ++i)
    if (!gone[i]) keep.push_back(n.children[i]);
  n.children = std::move(keep);
}

RTree::NodeId RTree::choose_child(NodeId id, const Mbr& box) const {
  const auto& kids = nodes_[id].children;
  const bool overlap_aware =
      policy_ == SplitPolicy::kRStar && nodes_[kids.front()].leaf;
  NodeId best = kids.front();
  double best_overlap = std::numeric_limits<double>::infinity();
  double best_growth = std::numeric_limits<double>::infinity();
  double best_volume = std::numeric_limits<double>::infinity();
  for (NodeId c : kids) {
    const Mbr& cm = nodes_[c].mbr;
    Mbr grown = cm;
    grown.expand(box);
    const double volume = cm.volume();
    const double growth = grown.volume() - volume;
    double overlap = 0.0;
    if (overlap_aware) {
      // Extra overlap with the siblings caused by absorbing the box.
      for (NodeId o : kids)
        if (o != c) overlap += grown.overlap(nodes_[o].mbr) - cm.overlap(nodes_[o].mbr);
    }
    const bool better =
        overlap < best_overlap ||
        (overlap == best_overlap &&
         (growth < best_growth || (growth == best_growth && volume < best_volume)));
    if (better) {
      best = c;
      best_overlap = overlap;
      best_growth = growth;
      best_volume = volume;
    }
  }
  return best;
}

std::size_t RTree::min_fill() const noexcept {
  return std::max<std::size_t>(1, (capacity_ * 2) / 5);
}

// The original node keeps group 0; the new sibling gets group 1.
RTree::NodeId RTree::split(NodeId id) {
  const Node& n = nodes_[id];
  const std::size_t count = n.children.size();
  std::vector<Mbr> boxes;
  boxes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) boxes.push_back(child_mbr(n, i));
  const std::vector<int> group =
      policy_ == SplitPolicy::kRStar ? rstar_groups(boxes) : quadratic_groups(boxes);

  Node sibling{Mbr::empty(dims_), n.leaf, {}};
  Mbr keep_mbr = Mbr::empty(dims_);
  std::vector<std::uint32_t> keep;
  for (std::size_t i = 0; i < count; ++i) {
    if (group[i] == 0) {
      keep.push_back(n.children[i]);
      keep_mbr.expand(boxes[i]);
    } else {
      sibling.children.push_back(n.children[i]);
      sibling.mbr.expand(boxes[i]);
    }
  }
  nodes_[id].children = std::move(keep);
  nodes_[id].mbr = std::move(keep_mbr);
  nodes_.push_back(std::move(sibling));
  return static_cast<NodeId>(nodes_.size() - 1);
}

// Guttman's quadratic split: seed with the most wasteful pair, then assign
// the entry with the strongest preference first.
std::vector<int> RTree::quadratic_groups(const std::vector<Mbr>& boxes) const {
  const std::size_t count = boxes.size();
  std::size_t seed_a = 0, seed_b = 1;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j) {
      Mbr joined = boxes[i];
      joined.expand(boxes[j]);
      const double waste = joined.volume() - boxes[i].volume() - boxes[j].volume();
      if (waste > worst) {
        worst = waste;
        seed_a = i;
        seed_b = j;
      }
    }
  }

  const std::size_t fill = min_fill();
  std::vector<int> group(count, -1);
  group[seed_a] = 0;
  group[seed_b] = 1;
  Mbr cover[2] = {boxes[seed_a], boxes[seed_b]};
  std::size_t sizes[2] = {1, 1};
  std::size_t remaining = count - 2;

  while (remaining > 0) {
    int forced = -1;
    if (sizes[0] + remaining == fill) forced = 0;
    if (sizes[1] + remaining == fill) forced = 1;
    if (forced >= 0) {
      for (std::size_t i = 0; i < count; ++i)
        if (group[i] < 0) group[i] = forced;
      break;
    }
    std::size_t pick = count;
    double best_diff = -1.0;
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      if (group[i] >= 0) continue;
      const double e0 = cover[0].enlargement(boxes[i]);
      const double e1 = cover[1].enlargement(boxes[i]);
      const double diff = std::abs(e0 - e1);
      if (diff > best_diff) {
        best_diff = diff;
        pick = i;
        d0 = e0;
        d1 = e1;
      }
    }
    int target;
    if (d0 != d1)
      target = d0 < d1 ? 0 : 1;
    else if (cover[0].volume() != cover[1].volume())
      target = cover[0].volume() < cover[1].volume() ? 0 : 1;
    else
      target = sizes[0] <= sizes[1] ? 0 : 1;
    group[pick] = target;
    cover[target].expand(boxes[pick]);
    ++sizes[target];
    --remaining;
  }
  return group;
}

// R*-style split: pick the axis whose candidate distributions have the least
// total margin, then the distribution on it with the least overlap (ties:
// least total volume).
std::vector<int> RTree::rstar_groups(const std::vector<Mbr>& boxes) const {
  const std::size_t count = boxes.size();
  const std::size_t fill = min_fill();
  const std::size_t first_k = fill;
  const std::size_t last_k = count - fill;

  auto prefix_hulls = [&](const std::vector<std::size_t>& order) {
    std::vector<Mbr> pre(count), suf(count);
    Mbr acc = Mbr::empty(dims_);
    for (std::size_t i = 0; i < count; ++i) {
      acc.expand(boxes[order[i]]);
      pre[i] = acc;
    }
    acc = Mbr::empty(dims_);
    for (std::size_t i = count; i-- > 0;) {
      acc.expand(boxes[order[i]]);
      suf[i] = acc;
    }
    return std::pair{std::move(pre), std::move(suf)};
  };

  std::vector<std::size_t> best_order;
  std::size_t best_k = first_k;
  double best_margin = std::numeric_limits<double>::infinity();

  for (std::size_t axis = 0; axis < dims_; ++axis) {
    double margin_sum = 0.0;
    std::vector<std::size_t> axis_order;
    std::size_t axis_k = first_k;
    double axis_overlap = std::numeric_limits<double>::infinity();
    double axis_volume = std::numeric_limits<double>::infinity();
    for (int by_hi = 0; by_hi < 2; ++by_hi) {
      std::vector<std::size_t> order(count);
      for (std::size_t i = 0; i < count; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Interval& ia = boxes[a][axis];
        const Interval& ib = boxes[b][axis];
        return by_hi ? (ia.hi < ib.hi || (ia.hi == ib.hi && ia.lo < ib.lo))
                     : (ia.lo < ib.lo || (ia.lo == ib.lo && ia.hi < ib.hi));
      });
      const auto [pre, suf] = prefix_hulls(order);
      for (std::size_t k = first_k; k <= last_k; ++k) {
        const Mbr& g0 = pre[k - 1];
        const Mbr& g1 = suf[k];
        margin_sum += g0.margin() + g1.margin();
        const double ov = g0.overlap(g1);
        const double vol = g0.volume() + g1.volume();
        if (ov < axis_overlap || (ov == axis_overlap && vol < axis_volume)) {
          axis_overlap = ov;
          axis_volume = vol;
          axis_order = order;
          axis_k = k;
        }
      }
    }
    if (margin_sum < best_margin) {
      best_margin = margin_sum;
      best_order = std::move(axis_order);
      best_k = axis_k;
    }
  }

  std::vector<int> group(count, 1);
  for (std::size_t i = 0; i < best_k; ++i) group[best_order[i]] = 0;
  return group;
}

void RTree::search(const Mbr& box, const std::function<void(EntryId)>& visit,
                   BlockCounter& counter) const {
  enforce(box.dimensions() == dims_, ErrorCode::kInvalidArgument,
          "search box dimensionality mismatch");
  std::vector<NodeId> stack{root_};
  while (!stack.empty()) {
    const Node& n = nodes_[stack.back()];
    stack.pop_back();
    if (n.leaf) {
      ++counter.data_blocks;
      for (EntryId e : n.children)
        if (box.contains(point(e))) visit(e);
    } else {
      ++counter.index_blocks;
      for (auto it = n.children.rbegin(); it != n.children.rend(); ++it)
        if (nodes_[*it].mbr.intersects(box)) stack.push_back(*it);
    }
  }
}

std::size_t RTree::height() const {
  // Bounded walk so a corrupt (cyclic) layout cannot hang the audit.
  std::size_t h = 1;
  NodeId id = root_;
  while (id < nodes_.size() && !nodes_[id].leaf && !nodes_[id].children.empty() &&
         h <= nodes_.size()) {
    id = nodes_[id].children.front();
    ++h;
  }
  return h;
}

std::size_t RTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf; }));
}

std::optional<std::string> RTree::audit() const {
  if (nodes_.empty()) return "tree has no root";
  std::vector<int> seen(size(), 0);
  std::vector<int> node_seen(nodes_.size(), 0);
  const std::size_t leaf_depth = height();
  std::vector<std::pair<NodeId, std::size_t>> stack{{root_, 1}};
  while (!stack.empty()) {
    auto [id, depth] = stack.back();
    stack.pop_back();
    if (id >= nodes_.size()) return "child reference out of range";
    if (node_seen[id]++) return "node " + std::to_string(id) + " reachable twice";
    const Node& n = nodes_[id];
    if (n.children.size() > capacity_) return "node " + std::to_string(id) + " over capacity";
    if (n.children.empty() && !(id == root_ && size() == 0))
      return "node " + std::to_string(id) + " is empty";
    if (n.mbr.dimensions() != dims_) return "node " + std::to_string(id) + " has wrong width";
    for (auto c : n.children)
      if (c >= (n.leaf ? size() : nodes_.size())) return "child reference out of range";
    if (!n.children.empty() && !(n.mbr == hull(n)))
      return "node " + std::to_string(id) + " MBR is not the hull of its children";
    if (n.leaf) {
      if (depth != leaf_depth) return "leaves on different levels";
      for (EntryId e : n.children) {
        if (seen[e]++) return "entry " + std::to_string(e) + " stored twice";
      }
    } else {
      for (NodeId c : n.children) stack.emplace_back(c, depth + 1);
    }
  }
  for (std::size_t e = 0; e < seen.size(); ++e)
    if (!seen[e]) return "entry " + std::to_string(e) + " unreachable";
  return std::nullopt;
}

void RTree::write(ByteWriter& w) const {
  w.u32(static_cast<std::uint32_t>(dims_));
  w.u32(static_cast<std::uint32_t>(capacity_));
  w.u8(static_cast<std::uint8_t>(policy_));
  w.u32(root_);
  w.count(nodes_.size());
  for (const Node& n : nodes_) {
    w.u8(n.leaf ? 1 : 0);
    for (const Interval& iv : n.mbr.extent()) {
      w.f64(iv.lo);
      w.f64(iv.hi);
    }
    w.count(n.children.size());
    for (auto c : n.children) w.u32(c);
  }
}

RTree RTree::read(ByteReader& r, std::vector<double> points) {
  RTree t;
  t.dims_ = r.u32();
  t.capacity_ = r.u32();
  const auto policy = r.u8();
  enforce(policy <= 1, ErrorCode::kMalformedMessage, "unknown split policy");
  t.policy_ = static_cast<SplitPolicy>(policy);
  enforce(t.dims_ >= 1 && t.capacity_ >= 4, ErrorCode::kMalformedMessage, "bad index header");
  enforce(points.size() % t.dims_ == 0, ErrorCode::kMalformedMessage,
          "point table does not match index dimensionality");
  t.root_ = r.u32();
  const std::size_t count = r.count();
  enforce(count >= 1 && t.root_ < count, ErrorCode::kMalformedMessage, "bad index root");
  t.nodes_.resize(count);
  for (Node& n : t.nodes_) {
    const auto leaf = r.u8();
    enforce(leaf <= 1, ErrorCode::kMalformedMessage, "bad node kind");
    n.leaf = leaf == 1;
    std::vector<Interval> extent(t.dims_);
    for (auto& iv : extent) {
      iv.lo = r.f64();
      iv.hi = r.f64();
    }
    n.mbr = Mbr(std::move(extent));
    const std::size_t kids = r.count();
    enforce(kids <= t.capacity_, ErrorCode::kMalformedMessage, "node over capacity");
    n.children.resize(kids);
    for (auto& c : n.children) c = r.u32();
  }
  t.points_ = std::move(points);
  if (auto problem = t.audit()) throw Error(ErrorCode::kMalformedMessage, "index: " + *problem);
  return t;
}

}  // namespace rasp
