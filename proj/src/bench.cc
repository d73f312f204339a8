#include "rasp/bench.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>

#include "rasp/datagen.h"
#include "rasp/index_store.h"
#include "rasp/perturbation.h"
#include "rasp/proxy.h"
#include "rasp/query.h"

namespace rasp {
namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Hosted {
  Matrix normalized;
  Normalization norm;
  RaspKey key;
  std::vector<PlainRecord> plain;
};

Hosted host_uniform(std::size_t n, std::size_t d, std::uint64_t seed) {
  Hosted h;
  auto [z, norm] = normalize_dataset(uniform_table(n, d, seed));
  h.normalized = std::move(z);
  h.norm = std::move(norm);
  h.key = keygen(h.normalized, seed + 1);
  h.plain = records_from_table(h.normalized);
  return h;
}

}  // namespace

void Report::add(std::vector<std::string> row) {
  enforce(row.size() == header.size(), ErrorCode::kInvalidArgument, "report row width mismatch");
  rows.push_back(std::move(row));
}

void Report::write_csv(std::ostream& out) const {
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << csv_cell(header[j]);
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) out << (j ? "," : "") << csv_cell(r[j]);
    out << '\n';
  }
}

std::string Report::to_csv() const {
  std::ostringstream s;
  write_csv(s);
  return s.str();
}

const std::string& Report::at(std::size_t row, std::string_view column) const {
  const auto it = std::find(header.begin(), header.end(), column);
  enforce(it != header.end(), ErrorCode::kInvalidArgument,
          "no report column '" + std::string(column) + "'");
  enforce(row < rows.size(), ErrorCode::kInvalidArgument, "report row out of range");
  return rows[row][static_cast<std::size_t>(it - header.begin())];
}

std::string fmt(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

RangeBenchSummary bench_range(const RangeBenchOptions& o) {
  enforce(o.range > 0.0 && o.range <= 1.0, ErrorCode::kInvalidArgument, "range must be in (0, 1]");
  enforce(o.queries >= 1, ErrorCode::kInvalidArgument, "need at least one query");
  const Hosted h = host_uniform(o.n, o.d, o.seed);
  const IndexStore store(perturb_dataset(h.key, h.plain, o.seed + 2), o.capacity, o.split);

  RangeBenchSummary s;
  s.linear_blocks = store.linear_scan_blocks();
  Rng rng(o.seed + 3);
  std::uniform_real_distribution<double> start(0.0, 1.0 - o.range);
  std::size_t with_candidates = 0;
  const auto t0 = Clock::now();
  for (std::size_t qi = 0; qi < o.queries; ++qi) {
    RangeQuerySpec spec{std::vector<Interval>(o.d)};
    for (std::size_t j = 0; j < o.d; ++j) {
      const double lo = start(rng);
      spec.bounds[j] = {h.norm.normalize(j, lo), h.norm.normalize(j, lo + o.range)};
    }
    const QueryResult r = store.two_stage_query(transform_query(h.key, spec));
    s.stage1_blocks += static_cast<double>(r.counters.total());
    s.stage1_index_blocks += static_cast<double>(r.counters.index_blocks);
    s.stage1_data_blocks += static_cast<double>(r.counters.data_blocks);
    s.stage1_records += static_cast<double>(r.stage1_count);
    s.result_records += static_cast<double>(r.ids.size());
    if (r.stage1_count > 0) {
      s.purity += static_cast<double>(r.ids.size()) / static_cast<double>(r.stage1_count);
      ++with_candidates;
    }
    std::vector<RecordId> expect;
    for (std::size_t i = 0; i < h.plain.size(); ++i) {
      if (spec.contains(h.plain[i].values)) expect.push_back(i);
    }
    if (expect != r.ids) ++s.mismatches;
  }
  const double q = static_cast<double>(o.queries);
  s.seconds_per_query = since(t0) / q;
  s.stage1_blocks /= q;
  s.stage1_index_blocks /= q;
  s.stage1_data_blocks /= q;
  s.stage1_records /= q;
  s.result_records /= q;
  s.purity = with_candidates ? s.purity / static_cast<double>(with_candidates) : 0.0;
  return s;
}

Report range_report(const RangeBenchOptions& o, const RangeBenchSummary& s) {
  Report r;
  r.header = {"n",          "d",           "range",        "queries",       "capacity",
              "split",      "linear_blocks", "stage1_blocks", "stage1_index", "stage1_data",
              "stage1_ratio", "stage1_records", "result_records", "purity", "mismatches",
              "ms_per_query"};
  r.add({std::to_string(o.n), std::to_string(o.d), fmt(o.range), std::to_string(o.queries),
         std::to_string(o.capacity), o.split == SplitPolicy::kRStar ? "rstar" : "quadratic",
         std::to_string(s.linear_blocks), fmt(s.stage1_blocks), fmt(s.stage1_index_blocks),
         fmt(s.stage1_data_blocks), fmt(s.stage1_blocks / static_cast<double>(s.linear_blocks)),
         fmt(s.stage1_records), fmt(s.result_records), fmt(s.purity),
         std::to_string(s.mismatches), fmt(1e3 * s.seconds_per_query)});
  return r;
}

KnnBenchSummary bench_knn(const KnnBenchOptions& o) {
  enforce(o.queries >= 1, ErrorCode::kInvalidArgument, "need at least one query");
  const Hosted h = host_uniform(o.n, o.d, o.seed);
  const IndexStore store(perturb_dataset(h.key, h.plain, o.seed + 2));
  LocalBackend backend(store);
  Proxy proxy(h.key, backend);

  KnnOptions ko;
  ko.k = o.k;
  ko.delta = o.delta;
  ko.bounds = o.bounds;
  Rng rng(o.seed + 4);
  std::vector<std::uniform_real_distribution<double>> coord;
  for (std::size_t j = 0; j < o.d; ++j) {
    coord.emplace_back(h.norm.normalize(j, 0.0), h.norm.normalize(j, 1.0));
  }
  KnnBenchSummary s;
  for (std::size_t qi = 0; qi < o.queries; ++qi) {
    Vec q(o.d);
    for (std::size_t j = 0; j < o.d; ++j) q[j] = coord[j](rng);
    const KnnAnswer a = proxy.knn(q, ko);
    const KnnResult& r = a.result;
    s.precision += r.candidates ? static_cast<double>(std::min(o.k, o.n)) /
                                      static_cast<double>(r.candidates)
                                : 0.0;
    s.rounds += static_cast<double>(r.inner.rounds);
    s.candidates += static_cast<double>(r.candidates);
    s.upper_attempts += static_cast<double>(r.upper_attempts);
    s.reached_target += r.inner.reached_target ? 1.0 : 0.0;
    s.pre_seconds += a.timing.pre_seconds;
    s.server_seconds += a.timing.server_seconds;
    s.post_seconds += a.timing.post_seconds;

    std::vector<Neighbor> all(h.plain.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = {i, 0.0, h.plain[i]};
    const auto exact = top_k(q, std::move(all), o.k);
    bool same = exact.size() == r.neighbors.size();
    for (std::size_t i = 0; same && i < exact.size(); ++i) same = exact[i].id == r.neighbors[i].id;
    if (!same) ++s.mismatches;
  }
  const double n = static_cast<double>(o.queries);
  s.precision /= n;
  s.rounds /= n;
  s.candidates /= n;
  s.upper_attempts /= n;
  s.reached_target /= n;
  s.pre_seconds /= n;
  s.server_seconds /= n;
  s.post_seconds /= n;
  return s;
}

Report knn_report(const std::vector<std::pair<KnnBenchOptions, KnnBenchSummary>>& runs) {
  Report r;
  r.header = {"n",          "d",          "k",        "delta",       "queries",
              "precision",  "rounds",     "candidates", "upper_attempts", "reached_target",
              "mismatches", "pre_ms",     "server_ms", "post_ms"};
  for (const auto& [o, s] : runs) {
    r.add({std::to_string(o.n), std::to_string(o.d), std::to_string(o.k), std::to_string(o.delta),
           std::to_string(o.queries), fmt(s.precision), fmt(s.rounds), fmt(s.candidates),
           fmt(s.upper_attempts), fmt(s.reached_target), std::to_string(s.mismatches),
           fmt(1e3 * s.pre_seconds), fmt(1e3 * s.server_seconds), fmt(1e3 * s.post_seconds)});
  }
  return r;
}

PerturbBenchSummary bench_perturb(const PerturbBenchOptions& o) {
  auto [z, norm] = normalize_dataset(uniform_table(o.n, o.d, o.seed));
  PerturbBenchSummary s;
  auto t0 = Clock::now();
  const RaspKey key = keygen(z, o.seed + 1);
  s.keygen_seconds = since(t0);
  const auto plain = records_from_table(z);
  t0 = Clock::now();
  const auto out = perturb_dataset(key, plain, o.seed + 2);
  s.perturb_seconds = since(t0);
  enforce(out.size() == o.n, ErrorCode::kInternal, "perturbation dropped records");
  s.records_per_second = s.perturb_seconds > 0.0 ? static_cast<double>(o.n) / s.perturb_seconds : 0.0;
  return s;
}

Report perturb_report(const PerturbBenchOptions& o, const PerturbBenchSummary& s) {
  Report r;
  r.header = {"n", "d", "keygen_seconds", "perturb_seconds", "records_per_second"};
  r.add({std::to_string(o.n), std::to_string(o.d), fmt(s.keygen_seconds), fmt(s.perturb_seconds),
         fmt(s.records_per_second)});
  return r;
}

}  // namespace rasp
