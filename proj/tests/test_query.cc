#include <doctest.h>

#include <cmath>
#include <random>

#include "rasp/datagen.h"
#include "rasp/error.h"
#include "rasp/query.h"
#include "support.h"

using namespace rasp;
using namespace rasp::testing;

namespace {

struct Setup {
  Matrix table;
  RaspKey key;
  std::vector<PerturbedRecord> perturbed;
};

Setup make_setup(std::size_t n, std::size_t d, std::uint64_t seed) {
  Setup s;
  s.table = normalize_dataset(uniform_table(n, d, seed)).first;
  s.key = keygen(s.table, seed + 1);
  s.perturbed = perturb_dataset(s.key, records_from_table(s.table), seed + 2);
  return s;
}

// Random closed box inside the data's range on every dimension.
RangeQuerySpec random_spec(std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.9, 1.9), w(0.2, 2.0);
  RangeQuerySpec s;
  for (std::size_t i = 0; i < d; ++i) {
    const double lo = u(rng);
    s.bounds.push_back({lo, lo + w(rng)});
  }
  return s;
}

// Hull of A (z) over every vertex of the encoded box times {v0, v1}.
Mbr vertex_oracle(const RaspKey& key, const std::vector<Interval>& enc) {
  const std::size_t d = enc.size();
  std::vector<Interval> ext(d + 2, {INFINITY, -INFINITY});
  for (std::size_t mask = 0; mask < (std::size_t{1} << (d + 1)); ++mask) {
    std::vector<double> z(d + 2);
    for (std::size_t i = 0; i < d; ++i) z[i] = (mask >> i & 1) ? enc[i].hi : enc[i].lo;
    z[d] = 1.0;
    z[d + 1] = (mask >> d & 1) ? key.noise.v1 : key.noise.v0;
    for (std::size_t r = 0; r < d + 2; ++r) {
      double y = 0.0;
      for (std::size_t c = 0; c < d + 2; ++c) y += key.a(r, c) * z[c];
      ext[r].lo = std::min(ext[r].lo, y);
      ext[r].hi = std::max(ext[r].hi, y);
    }
  }
  return Mbr(ext);
}

bool secure_accepts(const SecureRangeQuery& q, const PerturbedRecord& r) {
  if (!mbr_union_check(q, r)) return false;
  for (const auto& t : q.thetas)
    if (!theta_accepts(t.m, frobenius_norm(t.m), r.y)) return false;
  return true;
}

// Smallest |E(x_i) - E(bound)| over all bounds of the query.
double boundary_distance(const RaspKey& key, const RangeQuerySpec& s, std::span<const double> x) {
  double best = INFINITY;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = key.ope.dims[i].encrypt(x[i]);
    best = std::min({best, std::abs(e - key.ope.dims[i].encrypt(s.bounds[i].lo)),
                     std::abs(e - key.ope.dims[i].encrypt(s.bounds[i].hi))});
  }
  return best;
}

}  // namespace

TEST_SUITE("query") {

TEST_CASE("half-space vectors for an upper and a lower bound") {
  const auto up = halfspace_vectors_encoded(2, 0, BoundSide::kUpper, 0.3, 4.0);
  CHECK(up.w == Vec{1, 0, -0.3, 0});
  CHECK(up.q == Vec{0, 0, 4, -1});
  const auto low = halfspace_vectors_encoded(2, 0, BoundSide::kLower, 0.3, 4.0);
  CHECK(low.w == Vec{-1, 0, 0.3, 0});
  CHECK(low.q == Vec{0, 0, 4, -1});
  // record sitting on the bound: E(x0) = 0.3
  const Vec z{0.3, -1.2, 1.0, 6.0};
  CHECK(dot(up.w, z) == 0.0);
  CHECK(dot(low.w, z) == 0.0);
  CHECK(dot(up.q, z) == doctest::Approx(-2.0));
  CHECK_THROWS_AS(halfspace_vectors_encoded(2, 2, BoundSide::kUpper, 0.0, 4.0), Error);
}

TEST_CASE("theta sign agrees with the plaintext condition") {
  const Setup s = make_setup(1000, 3, 1);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> c(-1.5, 1.5);
  for (int t = 0; t < 20; ++t) {
    const std::size_t dim = t % 3;
    const BoundSide side = t % 2 ? BoundSide::kUpper : BoundSide::kLower;
    const double a = c(rng);
    const ThetaMatrix th = build_theta(s.key, dim, side, build_halfspace_vectors(s.key, dim, side, a));
    CHECK(th.dim == dim);
    CHECK(th.side == side);
    for (std::size_t i = 0; i < s.perturbed.size(); ++i) {
      const double x = s.table(i, dim);
      const double form = quadratic_form(th.m, s.perturbed[i].y);
      const bool plain = side == BoundSide::kUpper ? x < a : x > a;
      const bool gap = std::abs(s.key.ope.dims[dim].encrypt(x) -
                                ope_encrypt_query_constant(s.key.ope.dims[dim], a)) > 1e-7;
      if (!gap) continue;
      if (plain) CHECK(form < 0.0);
      else CHECK(form > 0.0);
    }
  }
}

TEST_CASE("records exactly on a bound score near zero") {
  const Setup s = make_setup(500, 2, 3);
  for (std::size_t i = 0; i < 100; ++i) {
    const double a = s.table(i, 1);
    for (BoundSide side : {BoundSide::kLower, BoundSide::kUpper}) {
      const ThetaMatrix th = build_theta(s.key, 1, side, build_halfspace_vectors(s.key, 1, side, a));
      const auto& u = s.perturbed[i].y;
      CHECK(std::abs(quadratic_form(th.m, u)) <= 1e-9 * dot(u, u));
      CHECK(theta_accepts(th.m, frobenius_norm(th.m), u));
    }
  }
}

TEST_CASE("a d=2 query has four thetas in slot order") {
  const Setup s = make_setup(500, 2, 4);
  const RangeQuerySpec spec{{{-0.5, 0.5}, {0.0, 1.0}}};
  const SecureRangeQuery q = transform_query(s.key, spec);
  REQUIRE(q.thetas.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(theta_slot(q.thetas[i].dim, q.thetas[i].side) == i);
    CHECK(q.thetas[i].m.rows() == 4);
  }
  CHECK(q.extended_dimensions() == 4);
}

TEST_CASE("query MBR equals the vertex enumeration hull") {
  std::mt19937_64 rng(5);
  for (std::size_t d : {1u, 2u, 4u, 6u}) {
    const Setup s = make_setup(600, d, 10 + d);
    for (int t = 0; t < 25; ++t) {
      const RangeQuerySpec spec = random_spec(d, rng);
      const auto enc = encode_bounds(s.key, spec);
      CHECK(transform_query(s.key, spec).mbr == vertex_oracle(s.key, enc));
    }
  }
}

TEST_CASE("full-domain MBR encloses every record") {
  const Setup s = make_setup(1000, 4, 6);
  const SecureRangeQuery q = transform_query(s.key, RangeQuerySpec::full_domain(4));
  for (const auto& r : s.perturbed) CHECK(mbr_union_check(q, r));
}

TEST_CASE("two-stage filter matches plaintext membership off the boundary") {
  const Setup s = make_setup(1000, 3, 7);
  std::mt19937_64 rng(8);
  std::size_t hits = 0;
  for (int t = 0; t < 30; ++t) {
    const RangeQuerySpec spec = random_spec(3, rng);
    const SecureRangeQuery q = transform_query(s.key, spec);
    for (std::size_t i = 0; i < s.perturbed.size(); ++i) {
      const auto x = s.table.row(i);
      const bool plain = spec.contains(x);
      hits += plain;
      // stage 1 never drops a true match
      if (plain) CHECK(mbr_union_check(q, s.perturbed[i]));
      if (!mbr_union_check(q, s.perturbed[i])) CHECK_FALSE(plain);
      if (boundary_distance(s.key, spec, x) > 1e-7) CHECK(secure_accepts(q, s.perturbed[i]) == plain);
    }
  }
  CHECK(hits > 0);
}

TEST_CASE("equality on a discrete column matches the plaintext oracle") {
  Matrix raw = uniform_table(1200, 2, 9);
  for (std::size_t i = 0; i < raw.rows(); ++i) raw(i, 1) = 1.0 + (i % 4);
  const auto [table, norm] = normalize_dataset(raw);
  const RaspKey key = keygen(table, 3);
  const auto p = perturb_dataset(key, records_from_table(table), 4);
  for (int code = 1; code <= 4; ++code) {
    const double c = norm.normalize(1, code);
    const SimpleCondition eq{1, CompareOp::kEqual, c};
    const RangeQuerySpec spec = RangeQuerySpec::from_conditions(2, std::span(&eq, 1));
    CHECK(spec.bounds[1].lo == spec.bounds[1].hi);
    const SecureRangeQuery q = transform_query(key, spec);
    std::size_t matched = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const bool plain = table(i, 1) == c;
      CHECK(secure_accepts(q, p[i]) == plain);
      matched += plain;
    }
    CHECK(matched == 300);
  }
}

TEST_CASE("closed MBR bounds: corner inside, just outside rejected") {
  const Setup s = make_setup(400, 2, 11);
  const SecureRangeQuery q = transform_query(s.key, RangeQuerySpec{{{-1, 1}, {-1, 1}}});
  PerturbedRecord r;
  for (std::size_t k = 0; k < 4; ++k) r.y.push_back(q.mbr[k].lo);
  CHECK(mbr_union_check(q, r));
  for (std::size_t k = 0; k < 4; ++k) r.y[k] = q.mbr[k].hi;
  CHECK(mbr_union_check(q, r));
  r.y[2] = q.mbr[2].hi + 1e-6;
  CHECK_FALSE(mbr_union_check(q, r));
  r.y[2] = q.mbr[2].lo - 1e-6;
  CHECK_FALSE(mbr_union_check(q, r));
}

TEST_CASE("same query and key give a bit-identical transformation") {
  const Setup s = make_setup(400, 3, 12);
  const RangeQuerySpec spec{{{-1, 0.5}, {0, 1}, {-2, 2}}};
  CHECK(transform_query(s.key, spec) == transform_query(s.key, spec));
}

TEST_CASE("every theta is rank one") {
  const Setup s = make_setup(400, 4, 13);
  const SecureRangeQuery q = transform_query(s.key, RangeQuerySpec{{{-1, 1}, {-1, 1}, {0, 1}, {0, 2}}});
  for (const auto& t : q.thetas) {
    const Matrix& m = t.m;
    // pivot on the largest entry; every 2x2 minor through it vanishes
    std::size_t pr = 0, pc = 0;
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c)
        if (std::abs(m(r, c)) > std::abs(m(pr, pc))) pr = r, pc = c;
    const double scale = m(pr, pc) * m(pr, pc);
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c)
        CHECK(std::abs(m(r, c) * m(pr, pc) - m(r, pc) * m(pr, c)) <= 1e-12 * scale);
  }
}

TEST_CASE("more than twenty dimensions are refused") {
  const Matrix t = normalize_dataset(uniform_table(300, 21, 14)).first;
  const RaspKey key = keygen(t, 1);
  try {
    transform_query(key, RangeQuerySpec::full_domain(21));
    FAIL("expected oversized query");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOversizedQuery);
  }
}

TEST_CASE("condition folding") {
  const SimpleCondition conds[] = {{0, CompareOp::kLess, 1.0},
                                   {0, CompareOp::kGreaterEqual, -1.0},
                                   {0, CompareOp::kLessEqual, 0.5},
                                   {1, CompareOp::kEqual, 0.25}};
  const auto spec = RangeQuerySpec::from_conditions(3, conds);
  CHECK(spec.bounds[0] == Interval{-1.0, 0.5});
  CHECK(spec.bounds[1] == Interval{0.25, 0.25});
  CHECK(std::isinf(spec.bounds[2].lo));
  CHECK_FALSE(spec.is_empty());
  const SimpleCondition clash[] = {{0, CompareOp::kLess, -1.0}, {0, CompareOp::kGreater, 1.0}};
  CHECK(RangeQuerySpec::from_conditions(1, clash).is_empty());
  const SimpleCondition ne{0, CompareOp::kNotEqual, 0.0};
  CHECK_THROWS_AS(RangeQuerySpec::from_conditions(1, std::span(&ne, 1)), Error);
  const SimpleCondition out{3, CompareOp::kLess, 0.0};
  CHECK_THROWS_AS(RangeQuerySpec::from_conditions(3, std::span(&out, 1)), Error);
}

}
