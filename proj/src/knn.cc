#include "rasp/knn.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "rasp/error.h"

namespace rasp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Outer half-edges are widened by this relative amount so records the
// server counted right at a replayed bound cannot fall outside the outer
// square through rounding.
constexpr double kOuterGuard = 1e-6;

}  // namespace

RangeQuerySpec SquareRange::to_spec() const {
  enforce(half_edge >= 0.0, ErrorCode::kInvalidArgument, "negative half-edge");
  RangeQuerySpec spec = RangeQuerySpec::full_domain(center.size());
  if (std::isinf(half_edge)) return spec;
  for (std::size_t j = 0; j < center.size(); ++j)
    spec.bounds[j] = {center[j] - half_edge, center[j] + half_edge};
  return spec;
}

ThetaMatrix theta_midpoint(const ThetaMatrix& high, const ThetaMatrix& low) {
  enforce(high.dim == low.dim && high.side == low.side, ErrorCode::kInvalidArgument,
          "midpoint of conditions on different bounds");
  enforce(high.m.rows() == low.m.rows() && high.m.cols() == low.m.cols(),
          ErrorCode::kInvalidArgument, "midpoint of differently shaped matrices");
  Matrix m(high.m.rows(), high.m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = 0.5 * (high.m(r, c) + low.m(r, c));
  return ThetaMatrix{high.dim, high.side, std::move(m)};
}

Mbr mbr_midpoint(const Mbr& high, const Mbr& low) {
  enforce(high.dimensions() == low.dimensions(), ErrorCode::kInvalidArgument,
          "midpoint of MBRs with different widths");
  std::vector<Interval> extent(high.dimensions());
  for (std::size_t j = 0; j < extent.size(); ++j)
    extent[j] = {0.5 * (high[j].lo + low[j].lo), 0.5 * (high[j].hi + low[j].hi)};
  return Mbr(std::move(extent));
}

SecureRangeQuery query_midpoint(const SecureRangeQuery& high, const SecureRangeQuery& low) {
  enforce(high.thetas.size() == low.thetas.size(), ErrorCode::kInvalidArgument,
          "midpoint of queries with different condition counts");
  SecureRangeQuery mid;
  mid.mbr = mbr_midpoint(high.mbr, low.mbr);
  mid.thetas.reserve(high.thetas.size());
  for (std::size_t s = 0; s < high.thetas.size(); ++s)
    mid.thetas.push_back(theta_midpoint(high.thetas[s], low.thetas[s]));
  return mid;
}

double mbr_gap(const Mbr& high, const Mbr& low) {
  enforce(high.dimensions() == low.dimensions(), ErrorCode::kInvalidArgument,
          "gap between MBRs with different widths");
  double gap = 0.0;
  for (std::size_t j = 0; j < high.dimensions(); ++j) {
    gap = std::max(gap, std::abs(high[j].lo - low[j].lo));
    gap = std::max(gap, std::abs(high[j].hi - low[j].hi));
  }
  return gap;
}

InnerRangeResult k_delta_range_search(const IndexStore& index, const KnnRequest& req) {
  enforce(req.k >= 1, ErrorCode::kInvalidArgument, "k must be at least 1");
  enforce(req.epsilon > 0.0 && req.epsilon < 1.0, ErrorCode::kInvalidArgument,
          "termination epsilon must lie in (0, 1)");
  index.check_query(req.low);
  index.check_query(req.high);

  const std::size_t k = req.k;
  const std::size_t k_hi = k + req.delta;
  SecureRangeQuery high = req.high;
  SecureRangeQuery low = req.low;

  InnerRangeResult out;
  out.count = index.count_in_range(high).count;
  if (out.count < k)
    throw Error(ErrorCode::kNeedLargerUpperBound,
                "upper range holds " + std::to_string(out.count) + " points, need " +
                    std::to_string(k));
  if (out.count <= k_hi) {
    out.reached_target = true;
    return out;
  }

  const double stop = req.epsilon * mbr_gap(high.mbr, low.mbr);
  while (mbr_gap(high.mbr, low.mbr) > stop) {
    SecureRangeQuery mid = query_midpoint(high, low);
    const std::size_t n = index.count_in_range(mid).count;
    ++out.rounds;
    if (n >= k) {
      out.trace.push_back(true);
      high = std::move(mid);
      out.count = n;
      if (n <= k_hi) {
        out.reached_target = true;
        break;
      }
    } else {
      out.trace.push_back(false);
      low = std::move(mid);
    }
  }
  return out;
}

double domain_length(const RaspKey& key) {
  double len = 0.0;
  for (const auto& dim : key.ope.dims) len = std::max(len, dim.max_value() - dim.min_value());
  return len;
}

std::pair<SquareRange, SquareRange> initial_bounds(std::span<const double> q,
                                                   const BoundOptions& options,
                                                   double domain_len) {
  enforce(domain_len > 0.0, ErrorCode::kInvalidArgument, "domain length must be positive");
  Vec center(q.begin(), q.end());
  const double user_half = 0.5 * options.edge_fraction * domain_len;
  double half = user_half;
  switch (options.policy) {
    case BoundPolicy::kUserBound:
      enforce(options.edge_fraction > 0.0, ErrorCode::kInvalidArgument,
              "edge fraction must be positive");
      break;
    case BoundPolicy::kCenterDistance: {
      enforce(options.center_epsilon > 0.0, ErrorCode::kInvalidArgument,
              "center epsilon must be positive");
      const double gamma = norm(q);
      // A query at the origin would give an empty cube.
      if (gamma > 0.0) half = options.center_epsilon * gamma;
      break;
    }
    case BoundPolicy::kFullDomain:
      half = kInf;
      break;
  }
  return {SquareRange{center, 0.0}, SquareRange{std::move(center), half}};
}

SquareRange outer_range_from_inner(const SquareRange& inner) {
  return SquareRange{inner.center,
                     inner.half_edge * std::sqrt(static_cast<double>(inner.center.size()))};
}

std::vector<Interval> replay_trace(std::span<const Interval> low, std::span<const Interval> high,
                                   const std::vector<bool>& trace) {
  enforce(low.size() == high.size(), ErrorCode::kInvalidArgument, "bound width mismatch");
  std::vector<Interval> hi(high.begin(), high.end());
  std::vector<Interval> lo(low.begin(), low.end());
  for (bool down : trace) {
    for (std::size_t j = 0; j < hi.size(); ++j) {
      const Interval mid{0.5 * (hi[j].lo + lo[j].lo), 0.5 * (hi[j].hi + lo[j].hi)};
      (down ? hi[j] : lo[j]) = mid;
    }
  }
  return hi;
}

std::vector<Interval> inner_box(const RaspKey& key, std::span<const double> q,
                                const SquareRange& low, const SquareRange& high,
                                const std::vector<bool>& trace) {
  const RangeQuerySpec high_spec = high.to_spec();
  const auto low_enc = encode_bounds(key, low.to_spec());
  const auto high_enc = encode_bounds(key, high_spec);
  const auto replayed = replay_trace(low_enc, high_enc, trace);
  std::vector<Interval> box(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) {
    const auto& ope = key.ope.dims[j];
    // A bound the search never moved keeps its exact plaintext value; this
    // matters when the OPE clamped it.
    box[j].lo = replayed[j].lo == high_enc[j].lo ? high_spec.bounds[j].lo
                                                 : ope_decrypt(ope, replayed[j].lo);
    box[j].hi = replayed[j].hi == high_enc[j].hi ? high_spec.bounds[j].hi
                                                 : ope_decrypt(ope, replayed[j].hi);
    box[j].lo = std::min(box[j].lo, q[j]);
    box[j].hi = std::max(box[j].hi, q[j]);
  }
  return box;
}

SquareRange outer_range_from_box(std::span<const double> q, std::span<const Interval> box) {
  enforce(q.size() == box.size(), ErrorCode::kInvalidArgument, "box width mismatch");
  double r2 = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double reach = std::max(q[j] - box[j].lo, box[j].hi - q[j]);
    r2 += reach * reach;
  }
  const double r = std::sqrt(r2);
  return SquareRange{Vec(q.begin(), q.end()), std::isinf(r) ? kInf : r * (1.0 + kOuterGuard)};
}

std::vector<Neighbor> top_k(std::span<const double> q, std::vector<Neighbor> candidates,
                            std::size_t k) {
  for (auto& c : candidates) {
    enforce(c.record.values.size() == q.size(), ErrorCode::kInvalidArgument,
            "candidate width does not match query");
    double d2 = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double diff = c.record.values[j] - q[j];
      d2 += diff * diff;
    }
    c.distance = std::sqrt(d2);
  }
  const std::size_t keep = std::min(k, candidates.size());
  auto by_distance = [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                    candidates.end(), by_distance);
  candidates.resize(keep);
  return candidates;
}

namespace {

bool covers_domain(const RaspKey& key, std::span<const double> q, double half) {
  for (std::size_t j = 0; j < q.size(); ++j) {
    const auto& ope = key.ope.dims[j];
    if (q[j] - half > ope.min_value() || q[j] + half < ope.max_value()) return false;
  }
  return true;
}

}  // namespace

KnnResult knn_query(const RaspKey& key, QueryBackend& backend, std::span<const double> q,
                    const KnnOptions& options, const EnvelopeCipher& cipher) {
  enforce(q.size() == key.dimensions(), ErrorCode::kInvalidArgument,
          "query point has " + std::to_string(q.size()) + " dimensions, key has " +
              std::to_string(key.dimensions()));
  enforce(std::all_of(q.begin(), q.end(), [](double v) { return std::isfinite(v); }),
          ErrorCode::kInvalidArgument, "query point must be finite");
  enforce(options.k >= 1, ErrorCode::kInvalidArgument, "k must be at least 1");
  enforce(options.k <= UINT32_MAX && options.delta <= UINT32_MAX, ErrorCode::kInvalidArgument,
          "k or delta too large");

  const double len = domain_length(key);
  auto [low, high] = initial_bounds(q, options.bounds, len);
  enforce(low.half_edge <= high.half_edge, ErrorCode::kInvalidArgument,
          "lower range exceeds upper range");
  if (!std::isinf(high.half_edge) && covers_domain(key, q, high.half_edge))
    high.half_edge = kInf;

  KnnResult result;
  const SecureRangeQuery low_q = transform_query(key, low.to_spec());
  bool everything = false;
  for (;;) {
    KnnRequest req{low_q, transform_query(key, high.to_spec()),
                   static_cast<std::uint32_t>(options.k),
                   static_cast<std::uint32_t>(options.delta), options.epsilon};
    ++result.upper_attempts;
    try {
      result.inner = backend.inner_range(req);
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNeedLargerUpperBound) throw;
      if (std::isinf(high.half_edge)) {
        // Fewer than k records exist at all.
        everything = true;
        break;
      }
      high.half_edge = high.half_edge > 0.0 ? 2.0 * high.half_edge : 0.5 * 0.05 * len;
      if (covers_domain(key, q, high.half_edge)) high.half_edge = kInf;
    }
  }
  result.upper = high;

  if (everything) {
    result.outer = SquareRange{Vec(q.begin(), q.end()), kInf};
  } else {
    const auto box = inner_box(key, q, low, high, result.inner.trace);
    result.outer = outer_range_from_box(q, box);
  }

  const QueryResult fetched = backend.outer_range(transform_query(key, result.outer.to_spec()));
  result.candidates = fetched.ids.size();
  result.outer_blocks = fetched.counters;
  std::vector<Neighbor> candidates(fetched.ids.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    candidates[i].id = fetched.ids[i];
    candidates[i].record = open_envelope(key, fetched.envelopes[i], cipher);
  }
  result.neighbors = top_k(q, std::move(candidates), options.k);
  return result;
}

}  // namespace rasp
