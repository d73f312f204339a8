#pragma once

// Proxy-side query transformation. A conjunctive range over d attributes
// becomes 2d quadratic conditions u^T Theta u <= 0 on perturbed vectors u,
// plus the MBR of the transformed polyhedron for the index stage.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rasp/linalg.h"
#include "rasp/mbr.h"
#include "rasp/perturbation.h"

namespace rasp {

enum class CompareOp : std::uint8_t {
  kLess,
  kLessEqual,
  kGreater,
  kGreaterEqual,
  kEqual,
  kNotEqual,
};

struct SimpleCondition {
  std::size_t dim = 0;
  CompareOp op = CompareOp::kLessEqual;
  double constant = 0.0;  // normalized original domain
};

// Closed interval per dimension; unqueried dimensions are (-inf, +inf) and
// clamp to [-beta, beta] through the OPE.
struct RangeQuerySpec {
  std::vector<Interval> bounds;

  static RangeQuerySpec full_domain(std::size_t d);
  // Intersects all conditions. Strict operators are treated as closed;
  // kNotEqual is rejected (split it into two conjunctions instead).
  static RangeQuerySpec from_conditions(std::size_t d, std::span<const SimpleCondition> conds);

  std::size_t dimensions() const noexcept { return bounds.size(); }
  bool is_empty() const;
  bool contains(std::span<const double> x) const;
};

enum class BoundSide : std::uint8_t { kLower = 0, kUpper = 1 };

struct ThetaMatrix {
  std::size_t dim = 0;
  BoundSide side = BoundSide::kUpper;
  Matrix m;

  friend bool operator==(const ThetaMatrix&, const ThetaMatrix&) = default;
};

// Thetas are ordered by slot 2*dim + side.
inline constexpr std::size_t theta_slot(std::size_t dim, BoundSide side) {
  return 2 * dim + static_cast<std::size_t>(side);
}

struct SecureRangeQuery {
  Mbr mbr;
  std::vector<ThetaMatrix> thetas;

  std::size_t extended_dimensions() const noexcept { return mbr.dimensions(); }
  friend bool operator==(const SecureRangeQuery&, const SecureRangeQuery&) = default;
};

struct HalfspaceVectors {
  Vec w;  // w^T z = +-(E(x_i) - c)
  Vec q;  // q^T z = v0 - v
};

inline constexpr std::size_t kMaxQueryDimensions = 20;

// Relative slack for u^T Theta u <= 0: tau * ||Theta||_F * ||u||^2. Rounding
// error of the form on records exactly at a bound stays near 1e-16 of that
// scale; tau leaves two orders of magnitude of headroom.
inline constexpr double kThetaSlack = 1e-14;

// Vectors for a condition whose OPE-space constant is already known.
HalfspaceVectors halfspace_vectors_encoded(std::size_t d, std::size_t dim, BoundSide side,
                                           double encoded_constant, double v0);

// constant is in the normalized original domain; it is OPE-encrypted here.
HalfspaceVectors build_halfspace_vectors(const RaspKey& key, std::size_t dim, BoundSide side,
                                         double constant);

// Theta = -(A^-1)^T w q^T A^-1, so u^T Theta u = (w^T z)(v - v0) and
// records on the satisfying side of the bound score <= 0.
ThetaMatrix build_theta(const RaspKey& key, std::size_t dim, BoundSide side,
                        const HalfspaceVectors& vectors);

// Theta for an OPE-space constant; the proxy uses this to check midpoints.
ThetaMatrix theta_for_encoded_bound(const RaspKey& key, std::size_t dim, BoundSide side,
                                    double encoded_constant);

// MBR of A*(z) over the box of extended vectors z whose first d entries lie
// in encoded_bounds, z_{d+1} = 1 and z_{d+2} in [v0, v1]. Equal to the hull
// of the 2^(d+1) transformed vertices.
Mbr transformed_box_mbr(const RaspKey& key, std::span<const Interval> encoded_bounds);

std::vector<Interval> encode_bounds(const RaspKey& key, const RangeQuerySpec& spec);

// Secure query from OPE-space bounds.
SecureRangeQuery transform_encoded_query(const RaspKey& key,
                                         std::span<const Interval> encoded_bounds);

SecureRangeQuery transform_query(const RaspKey& key, const RangeQuerySpec& spec);

double quadratic_form(const Matrix& m, std::span<const double> u);
bool theta_accepts(const Matrix& theta, double theta_norm, std::span<const double> u);

// Stage-1 predicate: record inside the query MBR (closed bounds).
bool mbr_union_check(const SecureRangeQuery& q, const PerturbedRecord& rec);

}  // namespace rasp
