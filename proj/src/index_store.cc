#include "rasp/index_store.h"

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_set>

#include "rasp/error.h"

namespace rasp {

namespace {

std::size_t record_width(const std::vector<PerturbedRecord>& records) {
  enforce(!records.empty(), ErrorCode::kInvalidArgument, "cannot index an empty dataset");
  const std::size_t width = records.front().y.size();
  enforce(width >= 3, ErrorCode::kInvalidArgument, "perturbed vectors need at least 3 entries");
  std::unordered_set<RecordId> ids;
  for (const auto& r : records) {
    enforce(r.y.size() == width, ErrorCode::kInvalidArgument,
            "record " + std::to_string(r.id) + " has width " + std::to_string(r.y.size()));
    enforce(ids.insert(r.id).second, ErrorCode::kInvalidArgument,
            "duplicate record id " + std::to_string(r.id));
  }
  return width;
}

}  // namespace

IndexStore::IndexStore(std::vector<PerturbedRecord> records, std::size_t capacity,
                       SplitPolicy policy)
    : records_(std::move(records)), tree_(record_width(records_), capacity, policy) {
  for (const auto& r : records_) tree_.insert(r.y);
}

IndexStore::IndexStore(std::vector<PerturbedRecord> records, RTree tree)
    : records_(std::move(records)), tree_(std::move(tree)) {
  const std::size_t width = record_width(records_);
  enforce(tree_.dimensions() == width && tree_.size() == records_.size(),
          ErrorCode::kMalformedMessage, "index does not match the dataset");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto p = tree_.point(static_cast<RTree::EntryId>(i));
    enforce(std::equal(p.begin(), p.end(), records_[i].y.begin()), ErrorCode::kMalformedMessage,
            "index entry " + std::to_string(i) + " does not match its record");
  }
}

std::size_t IndexStore::linear_scan_blocks() const {
  return (records_.size() + capacity() - 1) / capacity();
}

Stage1Result IndexStore::stage1_search(const Mbr& box) const {
  Stage1Result out;
  tree_.search(box, [&](RTree::EntryId e) { out.positions.push_back(e); }, out.counters);
  return out;
}

void IndexStore::check_query(const SecureRangeQuery& q) const {
  const std::size_t n = dimensions();
  const std::size_t d = n - 2;
  enforce(d <= kMaxQueryDimensions, ErrorCode::kOversizedQuery, "query dimensionality too large");
  enforce(q.mbr.dimensions() == n, ErrorCode::kInvalidArgument,
          "query MBR has " + std::to_string(q.mbr.dimensions()) + " dimensions, index has " +
              std::to_string(n));
  enforce(q.thetas.size() == 2 * d, ErrorCode::kInvalidArgument,
          "expected " + std::to_string(2 * d) + " quadratic conditions, got " +
              std::to_string(q.thetas.size()));
  for (std::size_t s = 0; s < q.thetas.size(); ++s) {
    const auto& t = q.thetas[s];
    enforce(t.m.rows() == n && t.m.cols() == n, ErrorCode::kInvalidArgument,
            "quadratic condition " + std::to_string(s) + " has the wrong shape");
    enforce(theta_slot(t.dim, t.side) == s, ErrorCode::kInvalidArgument,
            "quadratic condition " + std::to_string(s) + " is out of order");
  }
}

template <typename Visit>
CountResult IndexStore::run(const SecureRangeQuery& q, Visit&& on_match) const {
  check_query(q);
  std::vector<double> norms(q.thetas.size());
  for (std::size_t s = 0; s < norms.size(); ++s) norms[s] = frobenius_norm(q.thetas[s].m);

  CountResult out;
  std::vector<std::uint32_t> matches;
  tree_.search(
      q.mbr,
      [&](RTree::EntryId e) {
        ++out.stage1_count;
        const auto& y = records_[e].y;
        for (std::size_t s = 0; s < norms.size(); ++s)
          if (!theta_accepts(q.thetas[s].m, norms[s], y)) return;
        matches.push_back(e);
      },
      out.counters);
  out.count = matches.size();
  on_match(matches);
  return out;
}

QueryResult IndexStore::two_stage_query(const SecureRangeQuery& q) const {
  QueryResult out;
  std::vector<std::uint32_t> hits;
  const CountResult c = run(q, [&](std::vector<std::uint32_t>& m) { hits = std::move(m); });
  std::sort(hits.begin(), hits.end(),
            [&](std::uint32_t a, std::uint32_t b) { return records_[a].id < records_[b].id; });
  out.ids.reserve(hits.size());
  out.envelopes.reserve(hits.size());
  for (auto e : hits) {
    out.ids.push_back(records_[e].id);
    out.envelopes.push_back(records_[e].envelope);
  }
  out.counters = c.counters;
  out.stage1_count = c.stage1_count;
  return out;
}

CountResult IndexStore::count_in_range(const SecureRangeQuery& q) const {
  return run(q, [](std::vector<std::uint32_t>&) {});
}

}  // namespace rasp
