#pragma once

// Desk-scale experiment drivers. Each builds its own synthetic data, key and
// index from a seed and returns a report table (written as CSV by the CLI).

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "rasp/knn.h"
#include "rasp/rtree.h"

namespace rasp {

struct Report {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  void write_csv(std::ostream& out) const;
  std::string to_csv() const;
  // Cell lookup by column name; throws when absent.
  const std::string& at(std::size_t row, std::string_view column) const;
};

std::string fmt(double v, int precision = 6);

struct RangeBenchOptions {
  std::size_t n = 20000;
  std::size_t d = 5;
  double range = 0.3;  // width of each queried interval as a share of [0, 1]
  std::size_t queries = 1000;
  std::size_t capacity = kDefaultNodeCapacity;
  SplitPolicy split = SplitPolicy::kRStar;
  std::uint64_t seed = 1;
};

struct RangeBenchSummary {
  std::size_t linear_blocks = 0;
  double stage1_blocks = 0.0;  // mean over queries
  double stage1_index_blocks = 0.0;
  double stage1_data_blocks = 0.0;
  double stage1_records = 0.0;
  double result_records = 0.0;
  double purity = 0.0;  // mean of results / stage-1 candidates (queries with candidates)
  double seconds_per_query = 0.0;
  std::size_t mismatches = 0;  // results differing from a plaintext scan
};

// Uniform data, all d dimensions queried, each interval placed uniformly
// inside [0, 1]. Results are also checked against a plaintext scan.
RangeBenchSummary bench_range(const RangeBenchOptions& o);
Report range_report(const RangeBenchOptions& o, const RangeBenchSummary& s);

struct KnnBenchOptions {
  std::size_t n = 10000;
  std::size_t d = 2;
  std::size_t k = 5;
  std::size_t delta = 0;
  std::size_t queries = 200;
  BoundOptions bounds;
  std::uint64_t seed = 1;
};

struct KnnBenchSummary {
  double precision = 0.0;  // mean k / candidates
  double rounds = 0.0;
  double candidates = 0.0;
  double upper_attempts = 0.0;
  double reached_target = 0.0;  // share of queries whose inner count hit [k, k+delta]
  std::size_t mismatches = 0;   // answers differing from an exact scan
  double pre_seconds = 0.0;     // means per query
  double server_seconds = 0.0;
  double post_seconds = 0.0;
};

// Uniform data; query points drawn uniformly from the data's bounding box.
KnnBenchSummary bench_knn(const KnnBenchOptions& o);
Report knn_report(const std::vector<std::pair<KnnBenchOptions, KnnBenchSummary>>& runs);

struct PerturbBenchOptions {
  std::size_t n = 20000;
  std::size_t d = 9;
  std::uint64_t seed = 1;
};

struct PerturbBenchSummary {
  double keygen_seconds = 0.0;
  double perturb_seconds = 0.0;
  double records_per_second = 0.0;
};

PerturbBenchSummary bench_perturb(const PerturbBenchOptions& o);
Report perturb_report(const PerturbBenchOptions& o, const PerturbBenchSummary& s);

}  // namespace rasp
