#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rasp/datagen.h"
#include "rasp/error.h"
#include "rasp/knn.h"
#include "support.h"

using namespace rasp;
using namespace rasp::testing;

namespace {

// d = 1 key whose OPE is the identity on [-4, 4]; encoded space equals the
// plaintext, so scripted layouts are easy to reason about.
RaspKey identity_ope_key(std::uint64_t seed) {
  RaspKey k;
  k.a = generate_invertible_matrix(3, seed);
  k.a_inv = invert(k.a);
  k.ope.dims.push_back(OpeDimensionKey({-4.0, 4.0}, {-4.0, 4.0}, 4.0));
  k.ope.buckets = 1;
  k.envelope_key = EnvelopeKey::random();
  return k;
}

struct Setup {
  Matrix table;
  RaspKey key;
  std::vector<PerturbedRecord> perturbed;
};

Setup make_setup(const Matrix& raw, std::uint64_t seed) {
  Setup s;
  s.table = normalize_dataset(raw).first;
  s.key = keygen(s.table, seed);
  s.perturbed = perturb_dataset(s.key, records_from_table(s.table), seed + 1);
  return s;
}

// Exact top-k ids by (distance, id) over the plaintext table.
std::vector<RecordId> oracle_knn(const Matrix& t, const Vec& q, std::size_t k) {
  std::vector<std::pair<double, RecordId>> all;
  for (std::size_t i = 0; i < t.rows(); ++i)
    all.push_back({ref_dist(Vec(t.row(i).begin(), t.row(i).end()), q), i});
  std::sort(all.begin(), all.end());
  std::vector<RecordId> ids;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) ids.push_back(all[i].second);
  return ids;
}

std::vector<RecordId> ids_of(const KnnResult& r) {
  std::vector<RecordId> ids;
  for (const auto& n : r.neighbors) ids.push_back(n.id);
  return ids;
}

Vec random_point(std::size_t d, std::mt19937_64& rng, double lo = -1.6, double hi = 1.6) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec q(d);
  for (double& v : q) v = u(rng);
  return q;
}

// Entry difference relative to the matrix scale; Theta entries grow with
// the conditioning of A, so an absolute bound would depend on the key.
double max_entry_diff(const Matrix& a, const Matrix& b) {
  return max_abs_diff(a, b) / std::max(1.0, frobenius_norm(b));
}

}  // namespace

TEST_SUITE("knn") {

TEST_CASE("midpoints of identical inputs are the inputs") {
  const Setup s = make_setup(uniform_table(500, 2, 1), 2);
  const SecureRangeQuery q = transform_query(s.key, RangeQuerySpec{{{-1, 1}, {0, 1}}});
  CHECK(theta_midpoint(q.thetas[0], q.thetas[0]) == q.thetas[0]);
  CHECK(mbr_midpoint(q.mbr, q.mbr) == q.mbr);
  CHECK(query_midpoint(q, q) == q);
  CHECK(mbr_gap(q.mbr, q.mbr) == 0.0);
  CHECK_THROWS_AS(theta_midpoint(q.thetas[0], q.thetas[1]), Error);
}

TEST_CASE("averaged theta equals the theta of the bound between, through the OPE") {
  const Setup s = make_setup(non_gaussian_table(3000, 3, 3), 4);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> c(-1.5, 1.5);
  double worst = 0.0, worst_quarter = 0.0, worst_encoded = 0.0;
  for (int t = 0; t < 300; ++t) {
    const std::size_t dim = t % 3;
    const BoundSide side = t % 2 ? BoundSide::kUpper : BoundSide::kLower;
    const auto& ope = s.key.ope.dims[dim];
    const double h = c(rng), l = c(rng);
    const auto theta_at = [&](double plain) {
      return build_theta(s.key, dim, side, build_halfspace_vectors(s.key, dim, side, plain));
    };
    const ThetaMatrix th = theta_at(h), tl = theta_at(l);
    const ThetaMatrix mid = theta_midpoint(th, tl);
    // proxy side: plaintext bound b with f(b) = (f(h) + f(l)) / 2
    const double fh = ope.encrypt(h), fl = ope.encrypt(l);
    const double b = ope.decrypt(0.5 * (fh + fl));
    worst = std::max(worst, max_entry_diff(mid.m, theta_at(b).m));
    // two halvings toward low land on the quarter point
    const ThetaMatrix quarter = theta_midpoint(mid, tl);
    const double bq = ope.decrypt(0.25 * fh + 0.75 * fl);
    worst_quarter = std::max(worst_quarter, max_entry_diff(quarter.m, theta_at(bq).m));
    // the same identity without the plaintext round trip
    const ThetaMatrix direct = theta_for_encoded_bound(s.key, dim, side, 0.25 * fh + 0.75 * fl);
    worst_encoded = std::max(worst_encoded, max_entry_diff(quarter.m, direct.m));
  }
  CHECK(worst < 1e-9);
  CHECK(worst_quarter < 1e-9);
  CHECK(worst_encoded < 1e-12);
}

TEST_CASE("averaged MBR encloses the true MBR of the middle range") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-3.0, 3.0), w(0.0, 1.0);
  for (std::size_t d : {1u, 2u, 4u}) {
    const Setup s = make_setup(uniform_table(600, d, 7 + d), 8 + d);
    for (int t = 0; t < 200; ++t) {
      std::vector<Interval> hi(d), lo(d), mid(d);
      for (std::size_t j = 0; j < d; ++j) {
        const double a = u(rng), b = u(rng);
        hi[j] = {std::min(a, b), std::max(a, b)};
        const double p = hi[j].lo + w(rng) * hi[j].length();
        const double r = p + w(rng) * (hi[j].hi - p);
        lo[j] = {p, r};
        mid[j] = {0.5 * (hi[j].lo + lo[j].lo), 0.5 * (hi[j].hi + lo[j].hi)};
      }
      const Mbr avg = mbr_midpoint(transformed_box_mbr(s.key, hi), transformed_box_mbr(s.key, lo));
      const Mbr truth = transformed_box_mbr(s.key, mid);
      for (std::size_t k = 0; k < d + 2; ++k) {
        const double tol = 1e-12 * (1.0 + std::abs(truth[k].lo) + std::abs(truth[k].hi));
        CHECK(avg[k].lo <= truth[k].lo + tol);
        CHECK(avg[k].hi >= truth[k].hi - tol);
      }
    }
  }
}

TEST_CASE("MBR midpoint of plain intervals is the arithmetic midpoint") {
  const Mbr a(std::vector<Interval>{{0, 4}, {-2, 2}});
  const Mbr b(std::vector<Interval>{{1, 2}, {0, 0}});
  CHECK(mbr_midpoint(a, b) == Mbr(std::vector<Interval>{{0.5, 3}, {-1, 1}}));
  CHECK(mbr_gap(a, b) == 2.0);
}

TEST_CASE("scripted layout: counts 100, 12, 5, 3") {
  const RaspKey key = identity_ope_key(9);
  // Query at 0 with upper range [-1, 1]; the halvings visit half-edges
  // 0.5, 0.25, 0.125.
  std::vector<double> xs{0.05, -0.05, 0.1, 0.2, -0.2};
  for (int i = 0; i < 7; ++i) xs.push_back((i % 2 ? -1 : 1) * (0.3 + 0.02 * i));
  for (int i = 0; i < 88; ++i) xs.push_back((i % 2 ? -1 : 1) * (0.55 + 0.005 * i));
  Matrix t(xs.size(), 1, xs);
  const auto perturbed = perturb_dataset(key, records_from_table(t), 10);
  const IndexStore store(perturbed);

  const KnnRequest req{transform_query(key, RangeQuerySpec{{{0, 0}}}),
                       transform_query(key, RangeQuerySpec{{{-1, 1}}}), 3, 0, 1e-6};
  const InnerRangeResult r = k_delta_range_search(store, req);
  CHECK(store.count_in_range(req.high).count == 100);
  CHECK(r.trace == std::vector<bool>{true, true, true});
  CHECK(r.rounds == 3);
  CHECK(r.count == 3);
  CHECK(r.reached_target);

  // the visited ranges, replayed in plaintext, hold 12, 5 and 3 points
  std::vector<std::size_t> counts;
  for (double half : {0.5, 0.25, 0.125})
    counts.push_back(std::count_if(xs.begin(), xs.end(), [&](double x) { return std::abs(x) <= half; }));
  CHECK(counts == std::vector<std::size_t>{12, 5, 3});
}

TEST_CASE("upper range with fewer than k points asks for a larger bound") {
  const RaspKey key = identity_ope_key(11);
  Matrix t(4, 1, {0.1, 0.2, 2.0, 3.0});
  const IndexStore store(perturb_dataset(key, records_from_table(t), 1));
  const KnnRequest req{transform_query(key, RangeQuerySpec{{{0, 0}}}),
                       transform_query(key, RangeQuerySpec{{{-0.5, 0.5}}}), 3, 0, 1e-6};
  try {
    k_delta_range_search(store, req);
    FAIL("expected a request for a larger upper bound");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNeedLargerUpperBound);
  }
}

TEST_CASE("upper range already on target needs no rounds") {
  const RaspKey key = identity_ope_key(12);
  Matrix t(4, 1, {0.1, 0.2, 2.0, 3.0});
  const IndexStore store(perturb_dataset(key, records_from_table(t), 1));
  const KnnRequest req{transform_query(key, RangeQuerySpec{{{0, 0}}}),
                       transform_query(key, RangeQuerySpec{{{-0.5, 0.5}}}), 2, 0, 1e-6};
  const auto r = k_delta_range_search(store, req);
  CHECK(r.rounds == 0);
  CHECK(r.count == 2);
  CHECK(r.reached_target);
}

TEST_CASE("query collocated with a record shrinks onto it") {
  const Setup s = make_setup(uniform_table(2000, 2, 13), 14);
  const IndexStore store(s.perturbed);
  LocalBackend backend(store);
  const Vec q(s.table.row(77).begin(), s.table.row(77).end());
  KnnOptions opts;
  opts.k = 1;
  const KnnResult r = knn_query(s.key, backend, q, opts);
  REQUIRE(r.neighbors.size() == 1);
  CHECK(r.neighbors[0].id == 77);
  CHECK(r.neighbors[0].distance == 0.0);
  CHECK(r.inner.count >= 1);
}

TEST_CASE("larger delta never needs more rounds") {
  const Setup s = make_setup(uniform_table(5000, 2, 15), 16);
  const IndexStore store(s.perturbed);
  std::mt19937_64 rng(17);
  for (int t = 0; t < 30; ++t) {
    const Vec q = random_point(2, rng);
    const auto [low, high] = initial_bounds(q, {BoundPolicy::kFullDomain}, domain_length(s.key));
    std::size_t prev = SIZE_MAX;
    for (std::uint32_t delta : {0u, 1u, 3u, 10u, 50u}) {
      const KnnRequest req{transform_query(s.key, low.to_spec()),
                           transform_query(s.key, high.to_spec()), 5, delta, 1e-6};
      const auto r = k_delta_range_search(store, req);
      CHECK(r.rounds <= prev);
      prev = r.rounds;
    }
  }
}

TEST_CASE("rounds stay within the halving budget and visited ranges nest") {
  const Setup s = make_setup(uniform_table(3000, 3, 18), 19);
  const IndexStore store(s.perturbed);
  std::mt19937_64 rng(20);
  for (int t = 0; t < 20; ++t) {
    const Vec q = random_point(3, rng);
    const auto [low, high] = initial_bounds(q, {BoundPolicy::kFullDomain}, domain_length(s.key));
    const auto lo_enc = encode_bounds(s.key, low.to_spec());
    const auto hi_enc = encode_bounds(s.key, high.to_spec());
    const double eps = 1e-6;
    const KnnRequest req{transform_encoded_query(s.key, lo_enc), transform_encoded_query(s.key, hi_enc),
                         4, 0, eps};
    const auto r = k_delta_range_search(store, req);
    CHECK(r.rounds <= static_cast<std::size_t>(std::ceil(std::log2(1.0 / eps))) + 1);
    CHECK(r.trace.size() == r.rounds);
    // the upper range after each accepted step never gains points
    std::size_t prev = store.count_in_range(req.high).count;
    std::vector<bool> prefix;
    for (bool step : r.trace) {
      prefix.push_back(step);
      const auto enc = replay_trace(lo_enc, hi_enc, prefix);
      const std::size_t n = store.count_in_range(transform_encoded_query(s.key, enc)).count;
      CHECK(n <= prev);
      prev = n;
    }
    CHECK(prev == r.count);
  }
}

TEST_CASE("outer square circumscribes the inner square's sphere") {
  const SquareRange two = outer_range_from_inner(SquareRange{{0.0, 0.0}, 1.0});
  CHECK(2.0 * two.half_edge == doctest::Approx(2.0 * std::sqrt(2.0)));
  const SquareRange one = outer_range_from_inner(SquareRange{{5.0}, 0.75});
  CHECK(one.half_edge == 0.75);
  const std::vector<Interval> box{{-1.0, 0.5}, {-0.2, 2.0}};
  const SquareRange o = outer_range_from_box(Vec{0.0, 0.0}, box);
  CHECK(o.half_edge == doctest::Approx(std::sqrt(1.0 + 4.0)).epsilon(1e-5));
  CHECK(o.half_edge >= std::sqrt(5.0));
}

TEST_CASE("initial bounds per policy") {
  const Vec q{3.0, 4.0};
  const auto [l1, user] = initial_bounds(q, BoundOptions{}, 6.0);
  CHECK(l1.half_edge == 0.0);
  CHECK(l1.center == q);
  CHECK(2.0 * user.half_edge == doctest::Approx(0.05 * 6.0));
  BoundOptions center{BoundPolicy::kCenterDistance, 0.05, 0.5};
  CHECK(initial_bounds(q, center, 6.0).second.half_edge == doctest::Approx(2.5));
  const auto spec = initial_bounds(q, center, 6.0).second.to_spec();
  CHECK(spec.bounds[0] == Interval{0.5, 5.5});
  CHECK(spec.bounds[1] == Interval{1.5, 6.5});
  const auto full = initial_bounds(q, {BoundPolicy::kFullDomain}, 6.0).second;
  CHECK(std::isinf(full.half_edge));
  CHECK(std::isinf(full.to_spec().bounds[0].hi));
}

TEST_CASE("exact answers and full recall against a linear scan") {
  const Setup s = make_setup(uniform_table(4000, 2, 21), 22);
  const IndexStore store(s.perturbed);
  LocalBackend backend(store);
  std::mt19937_64 rng(23);
  for (BoundPolicy policy : {BoundPolicy::kUserBound, BoundPolicy::kCenterDistance,
                             BoundPolicy::kFullDomain}) {
    for (std::size_t k : {1u, 5u}) {
      for (int t = 0; t < 60; ++t) {
        const Vec q = random_point(2, rng);
        KnnOptions opts;
        opts.k = k;
        opts.bounds.policy = policy;
        const KnnResult r = knn_query(s.key, backend, q, opts);
        const auto want = oracle_knn(s.table, q, k);
        CHECK(ids_of(r) == want);
        const RangeQuerySpec outer = r.outer.to_spec();
        for (RecordId id : want) CHECK(outer.contains(s.table.row(id)));
        CHECK(r.candidates >= k);
      }
    }
  }
}

TEST_CASE("k = n returns every record, k > n returns what exists") {
  const Setup s = make_setup(uniform_table(300, 2, 24), 25);
  const IndexStore store(s.perturbed);
  LocalBackend backend(store);
  KnnOptions opts;
  opts.k = 300;
  const Vec q{0.1, -0.2};
  const KnnResult all = knn_query(s.key, backend, q, opts);
  CHECK(all.neighbors.size() == 300);
  CHECK(ids_of(all) == oracle_knn(s.table, q, 300));
  opts.k = 400;
  CHECK(knn_query(s.key, backend, q, opts).neighbors.size() == 300);
}

TEST_CASE("queries far outside the data still find neighbors") {
  const Setup s = make_setup(uniform_table(1000, 3, 26), 27);
  const IndexStore store(s.perturbed);
  LocalBackend backend(store);
  const Vec q{9.0, -9.0, 9.0};
  KnnOptions opts;
  opts.k = 3;
  const KnnResult r = knn_query(s.key, backend, q, opts);
  CHECK(ids_of(r) == oracle_knn(s.table, q, 3));
  CHECK(r.upper_attempts >= 1);
}

TEST_CASE("top_k orders by distance then id") {
  std::vector<Neighbor> c(4);
  c[0] = {7, 0.0, {{1.0, 0.0}, {}}};
  c[1] = {3, 0.0, {{0.0, 1.0}, {}}};
  c[2] = {5, 0.0, {{0.5, 0.0}, {}}};
  c[3] = {1, 0.0, {{2.0, 2.0}, {}}};
  const auto r = top_k(Vec{0.0, 0.0}, c, 3);
  REQUIRE(r.size() == 3);
  CHECK(r[0].id == 5);
  CHECK(r[1].id == 3);  // tie at distance 1 broken by id
  CHECK(r[2].id == 7);
  CHECK(r[1].distance == 1.0);
}

TEST_CASE("invalid kNN inputs") {
  const Setup s = make_setup(uniform_table(300, 2, 28), 29);
  const IndexStore store(s.perturbed);
  LocalBackend backend(store);
  KnnOptions opts;
  CHECK_THROWS_AS(knn_query(s.key, backend, Vec{0.0}, opts), Error);
  CHECK_THROWS_AS(knn_query(s.key, backend, Vec{0.0, NAN}, opts), Error);
  opts.k = 0;
  CHECK_THROWS_AS(knn_query(s.key, backend, Vec{0.0, 0.0}, opts), Error);
}

}
