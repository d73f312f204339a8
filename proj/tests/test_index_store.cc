#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "rasp/datagen.h"
#include "rasp/error.h"
#include "rasp/index_store.h"
#include "support.h"

using namespace rasp;
using namespace rasp::testing;

namespace {

PerturbedRecord point_record(RecordId id, Vec y) {
  PerturbedRecord r;
  r.id = id;
  r.y = std::move(y);
  return r;
}

std::vector<PerturbedRecord> random_points(std::size_t n, std::size_t dims, std::uint64_t seed) {
  const Matrix m = random_table(n, dims, seed, -10.0, 10.0);
  std::vector<PerturbedRecord> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(point_record(i, Vec(m.row(i).begin(), m.row(i).end())));
  return out;
}

Mbr random_box(std::size_t dims, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-10.0, 10.0), w(1.0, 12.0);
  std::vector<Interval> ext;
  for (std::size_t k = 0; k < dims; ++k) {
    const double lo = c(rng);
    ext.push_back({lo, lo + w(rng)});
  }
  return Mbr(ext);
}

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

std::vector<RecordId> plaintext_scan(const Matrix& table, const RangeQuerySpec& spec) {
  std::vector<RecordId> ids;
  for (std::size_t i = 0; i < table.rows(); ++i)
    if (spec.contains(table.row(i))) ids.push_back(i);
  return ids;
}

// A box of width `width` (in [0,1] units of the raw uniform data) per
// dimension, mapped through the same normalization.
RangeQuerySpec uniform_query(const Setup& s, std::size_t d, double width, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0 - width);
  RangeQuerySpec spec;
  for (std::size_t j = 0; j < d; ++j) {
    double lo = 0, hi = 0;
    // normalized min/max of the column stand in for 0 and 1
    double mn = INFINITY, mx = -INFINITY;
    for (std::size_t i = 0; i < s.table.rows(); ++i) {
      mn = std::min(mn, s.table(i, j));
      mx = std::max(mx, s.table(i, j));
    }
    const double a = u(rng);
    lo = mn + a * (mx - mn);
    hi = mn + (a + width) * (mx - mn);
    spec.bounds.push_back({lo, hi});
  }
  return spec;
}

}  // namespace

TEST_SUITE("index_store") {

TEST_CASE("one record is a single leaf whose MBR is the point") {
  RTree t(3);
  const Vec p{1.0, -2.0, 3.5};
  t.insert(p);
  CHECK(t.height() == 1);
  CHECK(t.leaf_count() == 1);
  CHECK(t.node(t.root()).leaf);
  CHECK(t.node(t.root()).mbr == Mbr::point(p));
  CHECK_FALSE(t.audit().has_value());
}

TEST_CASE("20K records at capacity 20 fill at least 1000 leaves") {
  for (SplitPolicy policy : {SplitPolicy::kRStar, SplitPolicy::kQuadratic}) {
    RTree t(5, 20, policy);
    for (const auto& r : random_points(20000, 5, 1)) t.insert(r.y);
    CHECK(t.leaf_count() >= 1000);
    CHECK(t.height() <= 6);
    const auto problem = t.audit();
    CHECK_MESSAGE(!problem.has_value(), problem.value_or(""));
  }
}

TEST_CASE("full-domain box returns everything and touches every block") {
  const IndexStore store(random_points(3000, 4, 2));
  const Stage1Result r = store.stage1_search(Mbr(std::vector<Interval>(4, {-INFINITY, INFINITY})));
  CHECK(r.positions.size() == 3000);
  CHECK(r.counters.data_blocks == store.tree().leaf_count());
  CHECK(r.counters.total() == store.tree().node_count());
  CHECK(r.counters.data_blocks >= store.linear_scan_blocks());
}

TEST_CASE("a box away from all data reads at most height blocks") {
  const IndexStore store(random_points(3000, 4, 3));
  const Stage1Result r = store.stage1_search(Mbr(std::vector<Interval>(4, {100.0, 101.0})));
  CHECK(r.positions.empty());
  CHECK(r.counters.total() <= store.tree().height());
}

TEST_CASE("stage-1 candidates equal a brute-force box scan") {
  for (SplitPolicy policy : {SplitPolicy::kRStar, SplitPolicy::kQuadratic}) {
    const auto pts = random_points(4000, 3, 4);
    const IndexStore store(pts, 20, policy);
    std::mt19937_64 rng(5);
    for (int t = 0; t < 200; ++t) {
      const Mbr box = random_box(3, rng);
      auto got = store.stage1_search(box).positions;
      std::sort(got.begin(), got.end());
      std::vector<std::uint32_t> want;
      for (std::uint32_t i = 0; i < pts.size(); ++i)
        if (box.contains(pts[i].y)) want.push_back(i);
      CHECK(got == want);
    }
  }
}

TEST_CASE("two-stage results equal a plaintext scan on 30% ranges") {
  const Setup s = make_setup(10000, 5, 6);
  const IndexStore store(s.perturbed);
  std::mt19937_64 rng(7);
  std::size_t nonempty = 0;
  for (int t = 0; t < 200; ++t) {
    const RangeQuerySpec spec = uniform_query(s, 5, 0.3, rng);
    const QueryResult r = store.two_stage_query(transform_query(s.key, spec));
    const auto want = plaintext_scan(s.table, spec);
    CHECK(r.ids == want);
    CHECK(r.envelopes.size() == r.ids.size());
    CHECK(r.stage1_count >= r.ids.size());
    CHECK(r.counters.total() > 0);
    nonempty += !want.empty();
  }
  CHECK(nonempty > 0);
}

TEST_CASE("wider ranges with many hits also match") {
  const Setup s = make_setup(3000, 3, 8);
  const IndexStore store(s.perturbed);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 50; ++t) {
    const RangeQuerySpec spec = uniform_query(s, 3, 0.7, rng);
    CHECK(store.two_stage_query(transform_query(s.key, spec)).ids == plaintext_scan(s.table, spec));
  }
}

TEST_CASE("count_in_range: empty, full and random") {
  const Setup s = make_setup(2000, 2, 10);
  const IndexStore store(s.perturbed);
  CHECK(store.count_in_range(transform_query(s.key, RangeQuerySpec::full_domain(2))).count == 2000);

  // a sliver strictly between two adjacent values of column 0
  std::vector<double> col = s.table.column(0);
  std::sort(col.begin(), col.end());
  const double mid = 0.5 * (col[1000] + col[1001]);
  const double eps = 0.25 * (col[1001] - col[1000]);
  RangeQuerySpec sliver = RangeQuerySpec::full_domain(2);
  sliver.bounds[0] = {mid - eps, mid + eps};
  CHECK(store.count_in_range(transform_query(s.key, sliver)).count == 0);

  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const RangeQuerySpec spec = uniform_query(s, 2, 0.4, rng);
    const SecureRangeQuery q = transform_query(s.key, spec);
    const CountResult c = store.count_in_range(q);
    CHECK(c.count == plaintext_scan(s.table, spec).size());
    CHECK(c.stage1_count >= c.count);
    CHECK(c.counters == store.two_stage_query(q).counters);
  }
}

TEST_CASE("results do not depend on insertion order") {
  const Setup s = make_setup(3000, 3, 12);
  auto shuffled = s.perturbed;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(13));
  const IndexStore a(s.perturbed), b(shuffled);
  const IndexStore c(shuffled, 20, SplitPolicy::kQuadratic);
  std::mt19937_64 rng(14);
  for (int t = 0; t < 50; ++t) {
    const SecureRangeQuery q = transform_query(s.key, uniform_query(s, 3, 0.4, rng));
    const auto ra = a.two_stage_query(q).ids;
    CHECK(b.two_stage_query(q).ids == ra);
    CHECK(c.two_stage_query(q).ids == ra);
  }
}

TEST_CASE("linear scan blocks are ceil(n / capacity)") {
  CHECK(IndexStore(random_points(1000, 3, 15)).linear_scan_blocks() == 50);
  CHECK(IndexStore(random_points(1001, 3, 15)).linear_scan_blocks() == 51);
  CHECK(IndexStore(random_points(7, 3, 15), 5).linear_scan_blocks() == 2);
}

TEST_CASE("queries of the wrong shape and duplicate ids are rejected") {
  const Setup s = make_setup(400, 2, 16);
  const IndexStore store(s.perturbed);
  const Setup other = make_setup(400, 3, 17);
  CHECK_THROWS_AS(store.two_stage_query(transform_query(other.key, RangeQuerySpec::full_domain(3))),
                  Error);
  auto dup = s.perturbed;
  dup[1].id = dup[0].id;
  CHECK_THROWS_AS(IndexStore{dup}, Error);
}

TEST_CASE("store rebuilt from a serialized tree answers identically") {
  const Setup s = make_setup(2000, 3, 18);
  const IndexStore store(s.perturbed);
  ByteWriter w;
  store.tree().write(w);
  std::vector<double> flat;
  for (const auto& r : s.perturbed) flat.insert(flat.end(), r.y.begin(), r.y.end());
  ByteReader rd(w.data());
  const IndexStore back(s.perturbed, RTree::read(rd, flat));
  std::mt19937_64 rng(19);
  for (int t = 0; t < 20; ++t) {
    const SecureRangeQuery q = transform_query(s.key, uniform_query(s, 3, 0.5, rng));
    const auto x = store.two_stage_query(q), y = back.two_stage_query(q);
    CHECK(x.ids == y.ids);
    CHECK(x.counters == y.counters);
  }
}

}
