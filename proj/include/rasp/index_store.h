#pragma once

// Server-side store: perturbed records, the R-tree over their vectors, and
// the two-stage range executor (MBR search, then the quadratic filters).
// Nothing here needs or accepts key material.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rasp/perturbation.h"
#include "rasp/query.h"
#include "rasp/rtree.h"

namespace rasp {

struct Stage1Result {
  std::vector<std::uint32_t> positions;  // indices into IndexStore::records()
  BlockCounter counters;
};

struct QueryResult {
  std::vector<RecordId> ids;  // ascending
  std::vector<Bytes> envelopes;
  BlockCounter counters;
  std::size_t stage1_count = 0;
};

struct CountResult {
  std::size_t count = 0;
  BlockCounter counters;
  std::size_t stage1_count = 0;
};

class IndexStore {
 public:
  // Record ids must be unique; all vectors share one width.
  explicit IndexStore(std::vector<PerturbedRecord> records,
                      std::size_t capacity = kDefaultNodeCapacity,
                      SplitPolicy policy = SplitPolicy::kRStar);
  // Reassembles a persisted store; the tree is audited against the records.
  IndexStore(std::vector<PerturbedRecord> records, RTree tree);

  std::size_t size() const noexcept { return records_.size(); }
  // Extended (perturbed) width d+2.
  std::size_t dimensions() const noexcept { return tree_.dimensions(); }
  std::size_t capacity() const noexcept { return tree_.capacity(); }
  std::span<const PerturbedRecord> records() const noexcept { return records_; }
  const RTree& tree() const noexcept { return tree_; }

  // Blocks read by scanning every record once.
  std::size_t linear_scan_blocks() const;

  Stage1Result stage1_search(const Mbr& box) const;
  QueryResult two_stage_query(const SecureRangeQuery& q) const;
  CountResult count_in_range(const SecureRangeQuery& q) const;

  // Rejects a query whose shape does not fit this store.
  void check_query(const SecureRangeQuery& q) const;

 private:
  template <typename Visit>
  CountResult run(const SecureRangeQuery& q, Visit&& on_match) const;

  std::vector<PerturbedRecord> records_;
  RTree tree_;
};

}  // namespace rasp
