#include "rasp/attack.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rasp/error.h"

namespace rasp {

namespace {

Vec zscore(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= n;
  enforce(var > 0.0, ErrorCode::kInvalidArgument, "NR_MSE is undefined for a constant series");
  const double sd = std::sqrt(var);
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) / sd;
  return out;
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  return out;
}

Matrix from_eigen(const Eigen::MatrixXd& m) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  return out;
}

}  // namespace

double nr_mse(std::span<const double> original, std::span<const double> estimate) {
  enforce(original.size() == estimate.size(), ErrorCode::kInvalidArgument,
          "NR_MSE series lengths differ");
  enforce(!original.empty(), ErrorCode::kInvalidArgument, "NR_MSE of empty series");
  const Vec a = zscore(original);
  const Vec b = zscore(estimate);
  double mse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mse += (a[i] - b[i]) * (a[i] - b[i]);
  mse /= static_cast<double>(a.size());
  return std::min(1.0, std::sqrt(mse) / 2.0);
}

AttackReport AttackReport::from(std::string attack, Vec per_dimension) {
  AttackReport r;
  r.attack = std::move(attack);
  r.per_dimension = std::move(per_dimension);
  if (!r.per_dimension.empty()) {
    r.min = *std::min_element(r.per_dimension.begin(), r.per_dimension.end());
    r.max = *std::max_element(r.per_dimension.begin(), r.per_dimension.end());
    r.mean = std::accumulate(r.per_dimension.begin(), r.per_dimension.end(), 0.0) /
             static_cast<double>(r.per_dimension.size());
  }
  r.resilient = r.min >= kResilienceThreshold;
  return r;
}

AttackReport score_estimate(std::string attack, const Matrix& original, const Matrix& estimate) {
  enforce(original.rows() == estimate.rows() && original.cols() == estimate.cols(),
          ErrorCode::kInvalidArgument, "estimate shape does not match the original");
  Vec scores(original.cols());
  for (std::size_t j = 0; j < original.cols(); ++j)
    scores[j] = nr_mse(original.column(j), estimate.column(j));
  return AttackReport::from(std::move(attack), std::move(scores));
}

AttackReport score_components(std::string attack, const Matrix& original,
                              const Matrix& components) {
  enforce(original.rows() == components.rows(), ErrorCode::kInvalidArgument,
          "components and original differ in row count");
  enforce(components.cols() >= 1, ErrorCode::kInvalidArgument, "no components to score");
  std::vector<Vec> comp;
  for (std::size_t c = 0; c < components.cols(); ++c) {
    const Vec col = components.column(c);
    // A constant component cannot match anything.
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    comp.push_back(*lo == *hi ? Vec{} : zscore(col));
  }
  const double n = static_cast<double>(original.rows());
  Vec scores(original.cols());
  for (std::size_t j = 0; j < original.cols(); ++j) {
    const Vec truth = zscore(original.column(j));
    double best_corr = 0.0;
    std::size_t best = comp.size();
    for (std::size_t c = 0; c < comp.size(); ++c) {
      if (comp[c].empty()) continue;
      const double corr = dot(truth, comp[c]) / n;
      if (best == comp.size() || std::abs(corr) > std::abs(best_corr)) {
        best_corr = corr;
        best = c;
      }
    }
    if (best == comp.size()) {
      scores[j] = 1.0;
      continue;
    }
    Vec est = comp[best];
    if (best_corr < 0.0)
      for (double& v : est) v = -v;
    scores[j] = nr_mse(truth, est);
  }
  return AttackReport::from(std::move(attack), std::move(scores));
}

KnownDistribution KnownDistribution::normal(double mean, double stddev) {
  enforce(stddev > 0.0, ErrorCode::kInvalidArgument, "known distribution has no spread");
  KnownDistribution k;
  k.mean_ = mean;
  k.stddev_ = stddev;
  return k;
}

KnownDistribution KnownDistribution::empirical(Vec sample) {
  enforce(!sample.empty(), ErrorCode::kInvalidArgument, "empty empirical distribution");
  KnownDistribution k;
  k.empirical_ = true;
  k.sample_ = std::move(sample);
  return k;
}

double KnownDistribution::draw(Rng& rng) const {
  if (empirical_) {
    std::uniform_int_distribution<std::size_t> pick(0, sample_.size() - 1);
    return sample_[pick(rng)];
  }
  std::normal_distribution<double> g(mean_, stddev_);
  return g(rng);
}

Matrix worst_case_estimator(std::span<const KnownDistribution> columns, std::size_t n,
                            std::uint64_t seed) {
  Rng rng(seed);
  Matrix out(n, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) out(i, j) = columns[j].draw(rng);
  return out;
}

Matrix perturb_matrix(const Matrix& a, const Matrix& encoded, const NoiseSpec& noise, Rng& rng) {
  Matrix out(encoded.rows(), a.rows());
  for (std::size_t i = 0; i < encoded.rows(); ++i) {
    const Vec y = extend_and_project(a, encoded.row(i), sample_noise(noise, rng));
    std::copy(y.begin(), y.end(), out.row(i).begin());
  }
  return out;
}

NaiveAuditReport naive_candidate_audit(const Matrix& perturbed, const RaspKey& key,
                                       const Matrix& original, std::size_t candidates,
                                       std::uint64_t seed) {
  const std::size_t d = key.dimensions();
  const std::size_t ext = d + 2;
  enforce(perturbed.cols() == ext, ErrorCode::kInvalidArgument,
          "perturbed table width does not match key");
  enforce(original.rows() == perturbed.rows() && original.cols() == d,
          ErrorCode::kInvalidArgument, "original table does not match the perturbed one");

  NaiveAuditReport report;
  const auto homogeneous = key.a_inv.row(d);
  for (std::size_t i = 0; i < perturbed.rows(); ++i)
    report.homogeneous_max_error =
        std::max(report.homogeneous_max_error, std::abs(dot(homogeneous, perturbed.row(i)) - 1.0));

  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const Matrix p_t = perturbed.transposed();  // (d+2) x n, records as columns
  for (std::size_t c = 0; c < candidates; ++c) {
    Matrix b(ext, ext);
    for (;;) {
      for (std::size_t r = 0; r < ext; ++r)
        for (std::size_t k = 0; k < ext; ++k) b(r, k) = r == d ? homogeneous[k] : g(rng);
      if (condition_number(b) < kDefaultConditionCap) break;
    }
    const Matrix estimate_t = b * p_t;
    ++report.candidates;
    bool valid = true;
    for (std::size_t i = 0; i < estimate_t.cols() && valid; ++i)
      valid = std::abs(estimate_t(d, i) - 1.0) <= 1e-9;
    if (valid) ++report.valid_candidates;
    double worst = 1.0;
    for (std::size_t j = 0; j < d; ++j)
      worst = std::min(worst, nr_mse(original.column(j), estimate_t.row(j)));
    report.candidate_min_nr_mse.push_back(worst);
    if (worst > kResilienceThreshold) ++report.far_candidates;
  }
  return report;
}

IcaResult fast_ica(const Matrix& data, std::size_t components, const IcaOptions& options) {
  enforce(data.rows() >= 2 && data.cols() >= 1, ErrorCode::kInvalidArgument,
          "ICA needs at least two rows");
  Eigen::MatrixXd x = to_eigen(data);
  const Eigen::Index n = x.rows();
  x.rowwise() -= x.colwise().mean();
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    throw Error(ErrorCode::kWhiteningFailure, "covariance eigendecomposition failed");
  const Eigen::VectorXd values = eig.eigenvalues();  // ascending
  const double top = values.maxCoeff();
  if (!(top > 0.0)) throw Error(ErrorCode::kWhiteningFailure, "data have no variance");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = values.size(); i-- > 0;)
    if (values(i) > options.rank_tolerance * top) keep.push_back(i);
  const std::size_t m = std::min(components, keep.size());
  enforce(m >= 1, ErrorCode::kInvalidArgument, "ICA needs at least one component");

  Eigen::MatrixXd whiten(m, x.cols());
  for (std::size_t r = 0; r < m; ++r)
    whiten.row(static_cast<Eigen::Index>(r)) =
        eig.eigenvectors().col(keep[r]).transpose() / std::sqrt(values(keep[r]));
  const Eigen::MatrixXd z = x * whiten.transpose();  // n x m, identity covariance

  Rng rng(options.seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto mi = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd w_all = Eigen::MatrixXd::Zero(mi, mi);
  IcaResult result;
  for (Eigen::Index c = 0; c < mi; ++c) {
    Eigen::VectorXd w(mi);
    bool converged = false;
    for (std::size_t attempt = 0; attempt <= options.restarts && !converged; ++attempt) {
      for (Eigen::Index k = 0; k < mi; ++k) w(k) = g(rng);
      for (Eigen::Index p = 0; p < c; ++p) w -= w.dot(w_all.row(p).transpose()) * w_all.row(p).transpose();
      if (w.norm() == 0.0) continue;
      w.normalize();
      for (std::size_t it = 0; it < options.max_iterations; ++it) {
        const Eigen::VectorXd proj = z * w;
        const Eigen::ArrayXd gx = proj.array().tanh();
        const double mean_deriv = (1.0 - gx.square()).mean();
        Eigen::VectorXd next = (z.transpose() * gx.matrix()) / static_cast<double>(n) -
                               mean_deriv * w;
        for (Eigen::Index p = 0; p < c; ++p)
          next -= next.dot(w_all.row(p).transpose()) * w_all.row(p).transpose();
        const double len = next.norm();
        if (!(len > 0.0)) break;
        next /= len;
        const double change = 1.0 - std::abs(next.dot(w));
        w = next;
        if (change < options.tolerance) {
          converged = true;
          break;
        }
      }
    }
    if (!converged) ++result.unconverged;
    w_all.row(c) = w.transpose();
  }
  result.components = from_eigen(z * w_all.transpose());
  return result;
}

AttackReport ica_attack(const Matrix& perturbed, const Matrix& original,
                        const IcaOptions& options) {
  enforce(perturbed.rows() == original.rows(), ErrorCode::kInvalidArgument,
          "perturbed and original tables differ in row count");
  try {
    // The homogeneous coordinate leaves d+1 independent directions.
    const std::size_t comps = perturbed.cols() >= 2 ? perturbed.cols() - 1 : 1;
    const IcaResult ica = fast_ica(perturbed, comps, options);
    return score_components("ica", original, ica.components);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kWhiteningFailure) throw;
    return AttackReport::from("ica", Vec(original.cols(), 1.0));
  }
}

KeySweepReport ica_key_sweep(const Matrix& original, const KeySweepOptions& options) {
  enforce(options.keys >= 1, ErrorCode::kInvalidArgument, "key sweep needs at least one key");
  KeySweepReport report;
  Vec minima;
  for (std::size_t i = 0; i < options.keys; ++i) {
    const std::uint64_t seed = options.seed + 7919 * i;
    Matrix encoded = original;
    Matrix a;
    NoiseSpec noise = options.keygen.noise;
    if (options.with_ope) {
      const RaspKey key = keygen(original, seed, options.keygen);
      for (std::size_t r = 0; r < original.rows(); ++r) {
        const Vec e = key.ope.encrypt(original.row(r));
        std::copy(e.begin(), e.end(), encoded.row(r).begin());
      }
      a = key.a;
    } else {
      a = generate_invertible_matrix(original.cols() + 2, seed, options.keygen.matrix);
    }
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const Matrix perturbed = perturb_matrix(a, encoded, noise, rng);
    IcaOptions ica = options.ica;
    ica.seed = options.ica.seed + i;
    report.per_key.push_back(ica_attack(perturbed, original, ica));
    minima.push_back(report.per_key.back().min);
  }
  report.best = *std::max_element(minima.begin(), minima.end());
  report.worst = *std::min_element(minima.begin(), minima.end());
  report.average = std::accumulate(minima.begin(), minima.end(), 0.0) /
                   static_cast<double>(minima.size());
  return report;
}

}  // namespace rasp
