#pragma once

// Attacks on perturbed data and the NR_MSE measure used to score them.
// Everything here runs offline with ground truth available to the
// evaluator; nothing is part of the query path.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rasp/linalg.h"
#include "rasp/perturbation.h"

namespace rasp {

// An attack leaves the data resilient when every dimension's NR_MSE stays
// at or above this.
inline constexpr double kResilienceThreshold = 0.2;

// Both series are z-scored first, so NR_MSE = RMSE / 2 (domain length 4
// standard deviations), capped at 1. Throws on length mismatch or a
// constant series.
double nr_mse(std::span<const double> original, std::span<const double> estimate);

struct AttackReport {
  std::string attack;
  Vec per_dimension;
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  bool resilient = false;

  static AttackReport from(std::string attack, Vec per_dimension);
};

// Scores an n x d estimate column by column against the n x d original.
AttackReport score_estimate(std::string attack, const Matrix& original, const Matrix& estimate);

// Matches each original column with the component of largest |correlation|
// (components may serve several columns), flips its sign to agree, and
// scores it.
AttackReport score_components(std::string attack, const Matrix& original,
                              const Matrix& components);

// What the attacker is assumed to know about one column.
class KnownDistribution {
 public:
  static KnownDistribution normal(double mean, double stddev);
  // Resampling with replacement from an observed sample.
  static KnownDistribution empirical(Vec sample);

  double draw(Rng& rng) const;

 private:
  bool empirical_ = false;
  double mean_ = 0.0;
  double stddev_ = 1.0;
  Vec sample_;
};

// n independent draws per column.
Matrix worst_case_estimator(std::span<const KnownDistribution> columns, std::size_t n,
                            std::uint64_t seed);

// y = A (encoded, 1, v) for every row, one perturbed vector per row.
Matrix perturb_matrix(const Matrix& a, const Matrix& encoded, const NoiseSpec& noise, Rng& rng);

struct NaiveAuditReport {
  double homogeneous_max_error = 0.0;  // max |row_{d+1}(A^-1) y - 1|
  std::size_t candidates = 0;
  std::size_t valid_candidates = 0;  // candidate row d+1 reproduces all ones
  std::size_t far_candidates = 0;    // min-dimension NR_MSE above the threshold
  Vec candidate_min_nr_mse;
};

// White-box check of the naive-estimation argument: the homogeneous row of
// A^-1 maps every perturbed vector to 1, and random matrices sharing that
// row give equally "valid" reconstructions that are far from the truth.
// perturbed is n x (d+2); original is the n x d normalized table.
NaiveAuditReport naive_candidate_audit(const Matrix& perturbed, const RaspKey& key,
                                       const Matrix& original, std::size_t candidates,
                                       std::uint64_t seed);

struct IcaOptions {
  std::size_t max_iterations = 200;
  std::size_t restarts = 3;
  double tolerance = 1e-6;
  // Eigenvalues below this share of the largest are dropped when whitening.
  double rank_tolerance = 1e-9;
  std::uint64_t seed = 1;
};

struct IcaResult {
  Matrix components;  // n x m estimated sources
  std::size_t unconverged = 0;
};

// Deflationary fixed-point ICA with the tanh contrast, after PCA whitening.
// Throws Error(kWhiteningFailure) when the data have no usable variance.
IcaResult fast_ica(const Matrix& data, std::size_t components, const IcaOptions& options);

// ICA on the perturbed vectors, scored against the original normalized
// table. A whitening failure scores every dimension 1.0.
AttackReport ica_attack(const Matrix& perturbed, const Matrix& original,
                        const IcaOptions& options);

struct KeySweepReport {
  std::vector<AttackReport> per_key;
  double best = 0.0;     // most resilient key (largest min NR_MSE)
  double worst = 0.0;    // most attacker-friendly key
  double average = 0.0;  // mean of per-key minima
};

struct KeySweepOptions {
  std::size_t keys = 50;
  bool with_ope = true;
  std::uint64_t seed = 1;
  KeygenOptions keygen;
  IcaOptions ica;
};

// Fresh key per round over the same normalized table; each report is the
// ICA attack's per-dimension NR_MSE for that key.
KeySweepReport ica_key_sweep(const Matrix& original, const KeySweepOptions& options);

}  // namespace rasp
