#include "rasp/query.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rasp/error.h"

namespace rasp {

RangeQuerySpec RangeQuerySpec::full_domain(std::size_t d) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return RangeQuerySpec{std::vector<Interval>(d, Interval{-inf, inf})};
}

RangeQuerySpec RangeQuerySpec::from_conditions(std::size_t d,
                                               std::span<const SimpleCondition> conds) {
  RangeQuerySpec spec = full_domain(d);
  for (const auto& c : conds) {
    enforce(c.dim < d, ErrorCode::kInvalidArgument,
            "condition on dimension " + std::to_string(c.dim) + " but d = " + std::to_string(d));
    enforce(!std::isnan(c.constant), ErrorCode::kInvalidArgument, "NaN query constant");
    Interval& b = spec.bounds[c.dim];
    switch (c.op) {
      case CompareOp::kLess:
      case CompareOp::kLessEqual:
        b.hi = std::min(b.hi, c.constant);
        break;
      case CompareOp::kGreater:
      case CompareOp::kGreaterEqual:
        b.lo = std::max(b.lo, c.constant);
        break;
      case CompareOp::kEqual:
        b.lo = std::max(b.lo, c.constant);
        b.hi = std::min(b.hi, c.constant);
        break;
      case CompareOp::kNotEqual:
        throw Error(ErrorCode::kInvalidArgument,
                    "'!=' is not a range condition; express it as two queries");
    }
  }
  return spec;
}

bool RangeQuerySpec::is_empty() const {
  return std::any_of(bounds.begin(), bounds.end(), [](const Interval& b) { return b.lo > b.hi; });
}

bool RangeQuerySpec::contains(std::span<const double> x) const {
  enforce(x.size() == bounds.size(), ErrorCode::kInvalidArgument, "record/query width mismatch");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!bounds[i].contains(x[i])) return false;
  return true;
}

HalfspaceVectors halfspace_vectors_encoded(std::size_t d, std::size_t dim, BoundSide side,
                                           double encoded_constant, double v0) {
  enforce(dim < d, ErrorCode::kInvalidArgument, "bound dimension out of range");
  HalfspaceVectors hv{Vec(d + 2, 0.0), Vec(d + 2, 0.0)};
  if (side == BoundSide::kUpper) {
    hv.w[dim] = 1.0;
    hv.w[d] = -encoded_constant;
  } else {
    hv.w[dim] = -1.0;
    hv.w[d] = encoded_constant;
  }
  hv.q[d] = v0;
  hv.q[d + 1] = -1.0;
  return hv;
}

HalfspaceVectors build_halfspace_vectors(const RaspKey& key, std::size_t dim, BoundSide side,
                                         double constant) {
  enforce(dim < key.dimensions(), ErrorCode::kInvalidArgument, "bound dimension out of range");
  return halfspace_vectors_encoded(key.dimensions(), dim, side,
                                   ope_encrypt_query_constant(key.ope.dims[dim], constant),
                                   key.noise.v0);
}

ThetaMatrix build_theta(const RaspKey& key, std::size_t dim, BoundSide side,
                        const HalfspaceVectors& vectors) {
  const std::size_t n = key.extended_dimensions();
  enforce(vectors.w.size() == n && vectors.q.size() == n, ErrorCode::kInvalidArgument,
          "half-space vectors do not match key dimensionality");
  // alpha = A^-T w, beta = A^-T q; Theta = -alpha beta^T.
  const Matrix inv_t = key.a_inv.transposed();
  const Vec alpha = inv_t.apply(vectors.w);
  const Vec beta = inv_t.apply(vectors.q);
  Matrix m(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l) m(k, l) = -alpha[k] * beta[l];
  return ThetaMatrix{dim, side, std::move(m)};
}

ThetaMatrix theta_for_encoded_bound(const RaspKey& key, std::size_t dim, BoundSide side,
                                    double encoded_constant) {
  return build_theta(
      key, dim, side,
      halfspace_vectors_encoded(key.dimensions(), dim, side, encoded_constant, key.noise.v0));
}

Mbr transformed_box_mbr(const RaspKey& key, std::span<const Interval> encoded_bounds) {
  const std::size_t d = key.dimensions();
  enforce(encoded_bounds.size() == d, ErrorCode::kInvalidArgument,
          "query bounds do not match key dimensionality");
  Vec zlo(d + 2), zhi(d + 2);
  for (std::size_t k = 0; k < d; ++k) {
    zlo[k] = encoded_bounds[k].lo;
    zhi[k] = encoded_bounds[k].hi;
  }
  zlo[d] = zhi[d] = 1.0;
  zlo[d + 1] = key.noise.v0;
  zhi[d + 1] = key.noise.v1;

  // Each output coordinate is linear in z, so its extremes over the box sit
  // at the vertex picking the smaller/larger term per coordinate. Summing in
  // the same order as Matrix::apply makes this match vertex enumeration
  // exactly (rounded addition is monotone).
  std::vector<Interval> extent(d + 2);
  for (std::size_t j = 0; j < d + 2; ++j) {
    double lo = 0.0, hi = 0.0;
    for (std::size_t k = 0; k < d + 2; ++k) {
      const double a = key.a(j, k) * zlo[k];
      const double b = key.a(j, k) * zhi[k];
      lo += std::min(a, b);
      hi += std::max(a, b);
    }
    extent[j] = {lo, hi};
  }
  return Mbr(std::move(extent));
}

std::vector<Interval> encode_bounds(const RaspKey& key, const RangeQuerySpec& spec) {
  enforce(spec.dimensions() == key.dimensions(), ErrorCode::kInvalidArgument,
          "query covers " + std::to_string(spec.dimensions()) + " dimensions, key has " +
              std::to_string(key.dimensions()));
  std::vector<Interval> out(spec.dimensions());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].lo = ope_encrypt_query_constant(key.ope.dims[i], spec.bounds[i].lo);
    out[i].hi = ope_encrypt_query_constant(key.ope.dims[i], spec.bounds[i].hi);
  }
  return out;
}

SecureRangeQuery transform_encoded_query(const RaspKey& key,
                                         std::span<const Interval> encoded_bounds) {
  const std::size_t d = key.dimensions();
  enforce(d <= kMaxQueryDimensions, ErrorCode::kOversizedQuery,
          "queries over more than " + std::to_string(kMaxQueryDimensions) +
              " dimensions are not supported");
  enforce(encoded_bounds.size() == d, ErrorCode::kInvalidArgument,
          "query bounds do not match key dimensionality");
  SecureRangeQuery q;
  q.mbr = transformed_box_mbr(key, encoded_bounds);
  q.thetas.reserve(2 * d);
  for (std::size_t i = 0; i < d; ++i) {
    enforce(encoded_bounds[i].lo <= encoded_bounds[i].hi, ErrorCode::kInvalidArgument,
            "empty interval on dimension " + std::to_string(i));
    q.thetas.push_back(theta_for_encoded_bound(key, i, BoundSide::kLower, encoded_bounds[i].lo));
    q.thetas.push_back(theta_for_encoded_bound(key, i, BoundSide::kUpper, encoded_bounds[i].hi));
  }
  return q;
}

SecureRangeQuery transform_query(const RaspKey& key, const RangeQuerySpec& spec) {
  enforce(!spec.is_empty(), ErrorCode::kInvalidArgument, "query range is empty");
  return transform_encoded_query(key, encode_bounds(key, spec));
}

double quadratic_form(const Matrix& m, std::span<const double> u) {
  const std::size_t n = u.size();
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto row = m.row(k);
    double acc = 0.0;
    for (std::size_t l = 0; l < n; ++l) acc += row[l] * u[l];
    total += u[k] * acc;
  }
  return total;
}

bool theta_accepts(const Matrix& theta, double theta_norm, std::span<const double> u) {
  return quadratic_form(theta, u) <= kThetaSlack * theta_norm * dot(u, u);
}

bool mbr_union_check(const SecureRangeQuery& q, const PerturbedRecord& rec) {
  return q.mbr.contains(rec.y);
}

}  // namespace rasp
