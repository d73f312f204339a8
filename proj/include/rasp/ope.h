#pragma once

// Bucket-based order-preserving encryption. Each dimension's empirical
// distribution is reshaped onto N(0,1) truncated to [-beta, beta]: the target
// is cut into equal-mass buckets, the sorted training values are cut at the
// same cumulative masses, and values are interpolated linearly inside the
// aligned buckets.

#include <cstddef>
#include <span>
#include <vector>

#include "rasp/linalg.h"

namespace rasp {

inline constexpr double kDefaultBeta = 4.0;
inline constexpr std::size_t kDefaultBuckets = 256;

class OpeDimensionKey {
 public:
  OpeDimensionKey() = default;
  // Both edge lists must be strictly increasing and of equal length >= 2.
  OpeDimensionKey(std::vector<double> source_boundaries, std::vector<double> target_boundaries,
                  double beta);

  // Values outside the trained range clamp to the extreme buckets.
  double encrypt(double x) const;
  // Inverse map on [-beta, beta]; used by the proxy only.
  double decrypt(double y) const;

  std::span<const double> source_boundaries() const noexcept { return source_; }
  std::span<const double> target_boundaries() const noexcept { return target_; }
  double beta() const noexcept { return beta_; }
  double min_value() const { return source_.front(); }
  double max_value() const { return source_.back(); }

  friend bool operator==(const OpeDimensionKey&, const OpeDimensionKey&) = default;

 private:
  std::vector<double> source_;
  std::vector<double> target_;
  double beta_ = kDefaultBeta;
};

struct OpeKey {
  std::vector<OpeDimensionKey> dims;
  std::size_t buckets = kDefaultBuckets;

  std::size_t dimensions() const noexcept { return dims.size(); }
  Vec encrypt(std::span<const double> x) const;
  Vec decrypt(std::span<const double> y) const;

  friend bool operator==(const OpeKey&, const OpeKey&) = default;
};

// Equal-mass cut points of N(0,1) truncated to [-beta, beta]; buckets + 1
// values from -beta to beta.
std::vector<double> truncated_normal_edges(std::size_t buckets, double beta);

OpeDimensionKey build_ope_dimension(std::span<const double> column, std::size_t buckets,
                                    double beta = kDefaultBeta);

// training is n x d, one column per searchable dimension. Requires n >= buckets
// and at least two distinct values per column.
OpeKey build_ope_key(const Matrix& training, std::size_t buckets = kDefaultBuckets,
                     double beta = kDefaultBeta);

double ope_encrypt(const OpeDimensionKey& key, double x);
// Query constants go through the same map so hyper-cubes stay hyper-cubes.
double ope_encrypt_query_constant(const OpeDimensionKey& key, double a);
double ope_decrypt(const OpeDimensionKey& key, double y);

}  // namespace rasp
