#pragma once

// Small dense linear algebra used across the perturbation pipeline: the
// (d+2)x(d+2) key matrix, its inverse, query matrices and data tables.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace rasp {

using Vec = std::vector<double>;
using Rng = std::mt19937_64;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> entries);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return values_.empty(); }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  Vec column(std::size_t c) const;

  // Row-major storage.
  std::span<const double> values() const noexcept { return values_; }

  Matrix transposed() const;
  Vec apply(std::span<const double> x) const;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend bool operator==(const Matrix& a, const Matrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
double max_abs_diff(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& m);
// Induced 1-norm (max absolute column sum).
double one_norm(const Matrix& m);

inline constexpr double kDefaultConditionCap = 1e8;

// Gauss-Jordan elimination with partial pivoting. Throws
// Error(kSingularMatrix) when a pivot vanishes or the 1-norm condition
// number exceeds condition_cap.
Matrix invert(const Matrix& m, double condition_cap = kDefaultConditionCap);

double condition_number(const Matrix& m);

struct InvertibleMatrixOptions {
  double condition_cap = kDefaultConditionCap;
  std::size_t retry_budget = 1000;
  // Entries with magnitude at or below this count as zero.
  double zero_tolerance = 1e-9;
};

// True when every row has at least two entries above tolerance and the last
// column has none at or below it.
bool satisfies_key_constraints(const Matrix& m, double zero_tolerance = 1e-9);

// Draws N(0,1) entries until the matrix is well conditioned and satisfies
// the key constraints. dim counts the two extended dimensions, so dim >= 3.
Matrix generate_invertible_matrix(std::size_t dim, std::uint64_t seed,
                                  const InvertibleMatrixOptions& options = {});

// Noise for the (d+2)-th coordinate. Values lie in (v0, v1].
struct NoiseSpec {
  double v0 = 4.0;
  double v1 = 8.0;

  void validate() const;
};

double sample_noise(const NoiseSpec& spec, Rng& rng);

// Standard normal helpers.
double normal_cdf(double x);
double normal_quantile(double p);

}  // namespace rasp
