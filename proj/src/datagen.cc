#include "rasp/datagen.h"

#include <algorithm>
#include <cmath>
#include <random>

namespace rasp {

Matrix uniform_table(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = u(rng);
  return m;
}

Matrix gaussian_table(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = g(rng);
  return m;
}

Matrix non_gaussian_table(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::exponential_distribution<double> ex(1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      switch (j % 4) {
        case 0:
          m(i, j) = u(rng);
          break;
        case 1:
          m(i, j) = ex(rng);
          break;
        case 2:
          m(i, j) = (u(rng) < 0.5 ? -2.0 : 2.0) + 0.5 * g(rng);
          break;
        default:
          m(i, j) = (u(rng) < 0.5 ? -1.0 : 1.0) * ex(rng);
          break;
      }
    }
  }
  return m;
}

namespace {

double draw_category(Rng& rng, const std::vector<double>& weights) {
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  return static_cast<double>(pick(rng) + 1);
}

}  // namespace

SyntheticTable adult_like_table(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  std::gamma_distribution<double> age_shape(4.0, 5.0);
  std::lognormal_distribution<double> weight(12.0, 0.5);
  std::exponential_distribution<double> gain(1.0 / 8000.0);
  std::exponential_distribution<double> loss(1.0 / 1500.0);

  SyntheticTable t;
  t.names = {"age",          "workclass", "fnlwgt", "education_num", "marital_status",
             "occupation",   "relationship", "race", "sex",          "capital_gain",
             "capital_loss", "hours_per_week"};
  t.categorical = {false, true, false, false, true, true, true, true, true, false, false, false};
  t.values = Matrix(n, t.names.size());
  const std::vector<double> workclass{70, 8, 6, 4, 3, 3, 1, 0.5};
  const std::vector<double> marital{46, 33, 14, 3, 3, 1, 0.1};
  const std::vector<double> occupation{13, 13, 12, 12, 11, 10, 6, 5, 4, 4, 3, 3, 2, 0.3};
  const std::vector<double> relationship{40, 25, 16, 11, 5, 3};
  const std::vector<double> race{85, 10, 3, 1, 1};
  const std::vector<double> sex{67, 33};

  for (std::size_t i = 0; i < n; ++i) {
    auto row = t.values.row(i);
    row[0] = std::clamp(std::round(17.0 + age_shape(rng)), 17.0, 90.0);
    row[1] = draw_category(rng, workclass);
    row[2] = std::round(weight(rng));
    row[3] = std::clamp(std::round(10.0 + 2.5 * g(rng)), 1.0, 16.0);
    row[4] = draw_category(rng, marital);
    row[5] = draw_category(rng, occupation);
    row[6] = draw_category(rng, relationship);
    row[7] = draw_category(rng, race);
    row[8] = draw_category(rng, sex);
    row[9] = u(rng) < 0.08 ? std::round(gain(rng)) : 0.0;
    row[10] = u(rng) < 0.05 ? std::round(loss(rng)) : 0.0;
    const double h = u(rng) < 0.5 ? 40.0 : 40.0 + 12.0 * g(rng);
    row[11] = std::clamp(std::round(h), 1.0, 99.0);
  }
  return t;
}

}  // namespace rasp
