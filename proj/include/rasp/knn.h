#pragma once

// kNN through square ranges. The server binary-searches between a secured
// lower and upper range using only averaged query matrices and MBRs; the
// proxy replays the decision trace, widens the inner square to an outer one
// that must hold the k nearest neighbors, and filters the decrypted
// candidates.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "rasp/index_store.h"
#include "rasp/perturbation.h"
#include "rasp/query.h"

namespace rasp {

struct SquareRange {
  Vec center;
  double half_edge = 0.0;  // +inf means the whole domain

  RangeQuerySpec to_spec() const;
};

// Everything here is built by the proxy; none of it carries key material.
struct KnnRequest {
  SecureRangeQuery low;
  SecureRangeQuery high;
  std::uint32_t k = 1;
  std::uint32_t delta = 0;
  // Stop once the MBR gap between the bounds falls below epsilon times the
  // starting gap.
  double epsilon = 1e-6;
};

struct InnerRangeResult {
  std::vector<bool> trace;  // true: upper bound moved down, false: lower moved up
  std::size_t count = 0;    // points in the final (upper) range
  std::size_t rounds = 0;
  bool reached_target = false;  // count landed in [k, k + delta]

  friend bool operator==(const InnerRangeResult&, const InnerRangeResult&) = default;
};

ThetaMatrix theta_midpoint(const ThetaMatrix& high, const ThetaMatrix& low);
Mbr mbr_midpoint(const Mbr& high, const Mbr& low);
SecureRangeQuery query_midpoint(const SecureRangeQuery& high, const SecureRangeQuery& low);
// Largest absolute difference between corresponding MBR bounds.
double mbr_gap(const Mbr& high, const Mbr& low);

// Throws Error(kNeedLargerUpperBound) when the upper range holds fewer than
// k points.
InnerRangeResult k_delta_range_search(const IndexStore& index, const KnnRequest& req);

// Where the proxy's queries go: an in-process store or a remote server.
class QueryBackend {
 public:
  virtual ~QueryBackend() = default;
  virtual QueryResult range(const SecureRangeQuery& q) = 0;
  virtual InnerRangeResult inner_range(const KnnRequest& req) = 0;
  virtual QueryResult outer_range(const SecureRangeQuery& q) { return range(q); }
};

class LocalBackend final : public QueryBackend {
 public:
  explicit LocalBackend(const IndexStore& store) : store_(store) {}
  QueryResult range(const SecureRangeQuery& q) override { return store_.two_stage_query(q); }
  InnerRangeResult inner_range(const KnnRequest& req) override {
    return k_delta_range_search(store_, req);
  }

 private:
  const IndexStore& store_;
};

enum class BoundPolicy : std::uint8_t { kUserBound, kCenterDistance, kFullDomain };

struct BoundOptions {
  BoundPolicy policy = BoundPolicy::kUserBound;
  double edge_fraction = 0.05;  // user bound: edge length as a share of the domain
  double center_epsilon = 0.5;  // center distance: half-edge = epsilon * |q|
};

// Widest trained range over all dimensions (normalized units).
double domain_length(const RaspKey& key);

// (L1, Lm): the degenerate cube at q and the initial upper range.
std::pair<SquareRange, SquareRange> initial_bounds(std::span<const double> q,
                                                   const BoundOptions& options,
                                                   double domain_length);

// Half-edge of the cube circumscribing the sphere around a square inner range.
SquareRange outer_range_from_inner(const SquareRange& inner);

// Per-bound OPE-space constants (lower, upper) after replaying the trace
// from the given low and high ranges.
std::vector<Interval> replay_trace(std::span<const Interval> low, std::span<const Interval> high,
                                   const std::vector<bool>& trace);

// Plaintext box for the replayed inner range, around q.
std::vector<Interval> inner_box(const RaspKey& key, std::span<const double> q,
                                const SquareRange& low, const SquareRange& high,
                                const std::vector<bool>& trace);

// Outer square around q that encloses every point of the inner box's
// circumscribing sphere: half-edge = distance to the farthest box corner.
SquareRange outer_range_from_box(std::span<const double> q, std::span<const Interval> box);

struct Neighbor {
  RecordId id = 0;
  double distance = 0.0;
  PlainRecord record;
};

struct KnnOptions {
  std::size_t k = 1;
  std::size_t delta = 0;
  double epsilon = 1e-6;
  BoundOptions bounds;
};

struct KnnResult {
  std::vector<Neighbor> neighbors;  // ascending (distance, id)
  InnerRangeResult inner;
  SquareRange upper;  // upper range that finally held >= k points
  SquareRange outer;
  std::size_t candidates = 0;      // records returned for the outer range
  std::size_t upper_attempts = 0;  // upper-bound requests sent (doublings + 1)
  BlockCounter outer_blocks;
};

KnnResult knn_query(const RaspKey& key, QueryBackend& backend, std::span<const double> q,
                    const KnnOptions& options,
                    const EnvelopeCipher& cipher = default_cipher());

// Exact top-k on decrypted records: ascending distance, ties by id.
std::vector<Neighbor> top_k(std::span<const double> q, std::vector<Neighbor> candidates,
                            std::size_t k);

}  // namespace rasp
