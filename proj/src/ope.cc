#include "rasp/ope.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "rasp/error.h"

namespace rasp {

namespace {

bool strictly_increasing(std::span<const double> v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

// Piecewise-linear map from `from` edges onto `to` edges, clamped at both ends.
double interpolate(std::span<const double> from, std::span<const double> to, double x) {
  if (!(x > from.front())) return to.front();
  if (!(x < from.back())) return to.back();
  const auto it = std::upper_bound(from.begin(), from.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - from.begin()) - 1;
  const double frac = (x - from[k]) / (from[k + 1] - from[k]);
  return to[k] + frac * (to[k + 1] - to[k]);
}

}  // namespace

OpeDimensionKey::OpeDimensionKey(std::vector<double> source_boundaries,
                                 std::vector<double> target_boundaries, double beta)
    : source_(std::move(source_boundaries)), target_(std::move(target_boundaries)), beta_(beta) {
  enforce(source_.size() == target_.size() && source_.size() >= 2, ErrorCode::kInvalidArgument,
          "OPE boundary lists need equal length >= 2");
  enforce(strictly_increasing(source_) && strictly_increasing(target_),
          ErrorCode::kInvalidArgument, "OPE boundaries must be strictly increasing");
  enforce(beta_ > 0.0 && target_.front() == -beta_ && target_.back() == beta_,
          ErrorCode::kInvalidArgument, "OPE target range must be [-beta, beta]");
}

double OpeDimensionKey::encrypt(double x) const {
  enforce(!std::isnan(x), ErrorCode::kInvalidArgument, "cannot encrypt NaN");
  return interpolate(source_, target_, x);
}

double OpeDimensionKey::decrypt(double y) const {
  enforce(!std::isnan(y), ErrorCode::kInvalidArgument, "cannot decrypt NaN");
  return interpolate(target_, source_, y);
}

Vec OpeKey::encrypt(std::span<const double> x) const {
  enforce(x.size() == dims.size(), ErrorCode::kInvalidArgument,
          "record dimensionality does not match OPE key");
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = dims[i].encrypt(x[i]);
  return out;
}

Vec OpeKey::decrypt(std::span<const double> y) const {
  enforce(y.size() == dims.size(), ErrorCode::kInvalidArgument,
          "ciphertext dimensionality does not match OPE key");
  Vec out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = dims[i].decrypt(y[i]);
  return out;
}

std::vector<double> truncated_normal_edges(std::size_t buckets, double beta) {
  enforce(buckets >= 1, ErrorCode::kInvalidArgument, "need at least one bucket");
  enforce(beta > 0.0, ErrorCode::kInvalidArgument, "beta must be positive");
  const double lo = normal_cdf(-beta);
  const double mass = normal_cdf(beta) - lo;
  std::vector<double> edges(buckets + 1);
  edges.front() = -beta;
  edges.back() = beta;
  for (std::size_t k = 1; k < buckets; ++k)
    edges[k] = normal_quantile(lo + mass * static_cast<double>(k) / static_cast<double>(buckets));
  return edges;
}

OpeDimensionKey build_ope_dimension(std::span<const double> column, std::size_t buckets,
                                    double beta) {
  enforce(buckets >= 1, ErrorCode::kInvalidArgument, "need at least one bucket");
  enforce(column.size() >= buckets, ErrorCode::kInvalidArgument,
          "OPE training needs at least as many values as buckets");
  std::vector<double> sorted(column.begin(), column.end());
  for (double v : sorted)
    enforce(std::isfinite(v), ErrorCode::kInvalidArgument, "OPE training data must be finite");
  std::sort(sorted.begin(), sorted.end());
  enforce(sorted.front() < sorted.back(), ErrorCode::kConstantColumn,
          "constant column has no order to preserve");

  const std::vector<double> target = truncated_normal_edges(buckets, beta);

  // Empirical quantiles at the target buckets' cumulative masses k/D,
  // linear interpolation between order statistics.
  const std::size_t n = sorted.size();
  std::vector<double> source(buckets + 1);
  for (std::size_t k = 0; k <= buckets; ++k) {
    const double h = static_cast<double>(n - 1) * static_cast<double>(k) /
                     static_cast<double>(buckets);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, n - 1);
    source[k] = sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  }
  source.front() = sorted.front();
  source.back() = sorted.back();

  // Runs of equal source edges (heavy ties) collapse to one edge whose target
  // is the run's mean, except at the ends where -beta / beta are kept.
  std::vector<double> src_out;
  std::vector<double> tgt_out;
  for (std::size_t i = 0; i <= buckets;) {
    std::size_t j = i;
    while (j + 1 <= buckets && source[j + 1] == source[i]) ++j;
    double t;
    if (i == 0) {
      t = target.front();
    } else if (j == buckets) {
      t = target.back();
    } else {
      double sum = 0.0;
      for (std::size_t k = i; k <= j; ++k) sum += target[k];
      t = sum / static_cast<double>(j - i + 1);
    }
    src_out.push_back(source[i]);
    tgt_out.push_back(t);
    i = j + 1;
  }
  return OpeDimensionKey(std::move(src_out), std::move(tgt_out), beta);
}

OpeKey build_ope_key(const Matrix& training, std::size_t buckets, double beta) {
  enforce(training.cols() >= 1, ErrorCode::kInvalidArgument, "training table has no columns");
  OpeKey key;
  key.buckets = buckets;
  key.dims.reserve(training.cols());
  for (std::size_t j = 0; j < training.cols(); ++j) {
    const Vec col = training.column(j);
    try {
      key.dims.push_back(build_ope_dimension(col, buckets, beta));
    } catch (const Error& e) {
      throw Error(e.code(), "column " + std::to_string(j) + ": " + e.what());
    }
  }
  return key;
}

double ope_encrypt(const OpeDimensionKey& key, double x) { return key.encrypt(x); }

double ope_encrypt_query_constant(const OpeDimensionKey& key, double a) { return key.encrypt(a); }

double ope_decrypt(const OpeDimensionKey& key, double y) { return key.decrypt(y); }

}  // namespace rasp
