#include "rasp/linalg.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include <boost/math/distributions/normal.hpp>

#include "rasp/error.h"

namespace rasp {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kSingularMatrix: return "singular_matrix";
    case ErrorCode::kRetryBudgetExhausted: return "retry_budget_exhausted";
    case ErrorCode::kConstantColumn: return "constant_column";
    case ErrorCode::kMalformedMessage: return "malformed_message";
    case ErrorCode::kVersionMismatch: return "version_mismatch";
    case ErrorCode::kOversizedQuery: return "oversized_query";
    case ErrorCode::kNeedLargerUpperBound: return "need_larger_upper_bound";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kUnknownCategory: return "unknown_category";
    case ErrorCode::kCrypto: return "crypto";
    case ErrorCode::kWhiteningFailure: return "whitening_failure";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  enforce(values_.size() == rows_ * cols_, ErrorCode::kInvalidArgument,
          "matrix entry count does not match shape");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  values_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    enforce(r.size() == cols_, ErrorCode::kInvalidArgument, "ragged matrix literal");
    values_.insert(values_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> entries) {
  Matrix m(entries.size(), entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return m;
}

Vec Matrix::column(std::size_t c) const {
  Vec out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Vec Matrix::apply(std::span<const double> x) const {
  enforce(x.size() == cols_, ErrorCode::kInvalidArgument, "matrix-vector shape mismatch");
  Vec y(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double* a = values_.data() + r * cols_;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) acc += a[c] * x[c];
    y[r] = acc;
  }
  return y;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  enforce(a.cols_ == b.rows_, ErrorCode::kInvalidArgument, "matrix product shape mismatch");
  Matrix out(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  enforce(a.size() == b.size(), ErrorCode::kInvalidArgument, "dot product length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double max_abs_diff(const Matrix& a, const Matrix& b) {
  enforce(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::kInvalidArgument,
          "shape mismatch");
  double worst = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) worst = std::max(worst, std::abs(av[i] - bv[i]));
  return worst;
}

double frobenius_norm(const Matrix& m) { return norm(m.values()); }

double one_norm(const Matrix& m) {
  double best = 0.0;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) sum += std::abs(m(r, c));
    best = std::max(best, sum);
  }
  return best;
}

namespace {

// Returns the inverse or an empty matrix when a pivot is exactly zero.
Matrix gauss_jordan(const Matrix& m) {
  const std::size_t n = m.rows();
  Matrix work = m;
  Matrix inv = Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(work(r, col)) > std::abs(work(pivot, col))) pivot = r;
    if (work(pivot, col) == 0.0) return {};
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(work(pivot, c), work(col, c));
        std::swap(inv(pivot, c), inv(col, c));
      }
    }
    const double scale = 1.0 / work(col, col);
    for (std::size_t c = 0; c < n; ++c) {
      work(col, c) *= scale;
      inv(col, c) *= scale;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = work(r, col);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        work(r, c) -= f * work(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  return inv;
}

}  // namespace

double condition_number(const Matrix& m) {
  enforce(m.square() && !m.empty(), ErrorCode::kInvalidArgument,
          "condition number needs a non-empty square matrix");
  Matrix inv = gauss_jordan(m);
  if (inv.empty()) return std::numeric_limits<double>::infinity();
  return one_norm(m) * one_norm(inv);
}

Matrix invert(const Matrix& m, double condition_cap) {
  enforce(m.square() && !m.empty(), ErrorCode::kInvalidArgument,
          "invert needs a non-empty square matrix");
  Matrix inv = gauss_jordan(m);
  enforce(!inv.empty(), ErrorCode::kSingularMatrix, "matrix is singular");
  const double cond = one_norm(m) * one_norm(inv);
  if (!(cond <= condition_cap)) {
    std::ostringstream msg;
    msg << "matrix is ill-conditioned (cond=" << cond << ", cap=" << condition_cap << ")";
    throw Error(ErrorCode::kSingularMatrix, msg.str());
  }
  return inv;
}

bool satisfies_key_constraints(const Matrix& m, double zero_tolerance) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::size_t nonzero = 0;
    for (double v : m.row(r))
      if (std::abs(v) > zero_tolerance) ++nonzero;
    if (nonzero < 2) return false;
    if (std::abs(m(r, m.cols() - 1)) <= zero_tolerance) return false;
  }
  return true;
}

Matrix generate_invertible_matrix(std::size_t dim, std::uint64_t seed,
                                  const InvertibleMatrixOptions& options) {
  enforce(dim >= 3, ErrorCode::kInvalidArgument,
          "key matrix needs dim >= 3 (d >= 1 plus two extended dimensions)");
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t attempt = 0; attempt < options.retry_budget; ++attempt) {
    Matrix m(dim, dim);
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) m(r, c) = gauss(rng);
    if (!satisfies_key_constraints(m, options.zero_tolerance)) continue;
    if (condition_number(m) <= options.condition_cap) return m;
  }
  throw Error(ErrorCode::kRetryBudgetExhausted,
              "no admissible invertible matrix within " + std::to_string(options.retry_budget) +
                  " draws");
}

void NoiseSpec::validate() const {
  enforce(std::isfinite(v0) && std::isfinite(v1) && v1 > v0, ErrorCode::kInvalidArgument,
          "noise spec needs finite bounds with v1 > v0");
}

double sample_noise(const NoiseSpec& spec, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    // unit is [0,1), so v1 - u*(v1-v0) lands in (v0, v1] up to rounding.
    const double v = spec.v1 - unit(rng) * (spec.v1 - spec.v0);
    if (v > spec.v0 && v <= spec.v1) return v;
  }
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  enforce(p > 0.0 && p < 1.0, ErrorCode::kInvalidArgument, "quantile needs p in (0,1)");
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, p);
}

}  // namespace rasp
