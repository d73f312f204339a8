#pragma once

// Synthetic tables for tests and benchmarks. All generators are
// deterministic in the seed and return raw (unnormalized) values.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rasp/linalg.h"

namespace rasp {

// i.i.d. U[0,1].
Matrix uniform_table(std::size_t n, std::size_t d, std::uint64_t seed);

// i.i.d. N(0,1).
Matrix gaussian_table(std::size_t n, std::size_t d, std::uint64_t seed);

// Continuous, clearly non-Gaussian columns cycling through uniform,
// exponential, a two-component mixture and Laplace. Columns are independent.
Matrix non_gaussian_table(std::size_t n, std::size_t d, std::uint64_t seed);

struct SyntheticTable {
  Matrix values;
  std::vector<std::string> names;
  std::vector<bool> categorical;  // values are 1..m category codes
};

// Census-style mix of skewed numeric and low-cardinality categorical columns
// (12 columns: age, workclass, fnlwgt, education_num, marital_status,
// occupation, relationship, race, sex, capital_gain, capital_loss,
// hours_per_week).
SyntheticTable adult_like_table(std::size_t n, std::uint64_t seed);

}  // namespace rasp
