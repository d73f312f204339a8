#include "rasp/perturbation.h"

#include <cmath>
#include <sstream>

#include "rasp/codec.h"
#include "rasp/error.h"

namespace rasp {

Vec Normalization::normalize(std::span<const double> row) const {
  enforce(row.size() == mean.size(), ErrorCode::kInvalidArgument, "row width mismatch");
  Vec out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = normalize(j, row[j]);
  return out;
}

Vec Normalization::denormalize(std::span<const double> row) const {
  enforce(row.size() == mean.size(), ErrorCode::kInvalidArgument, "row width mismatch");
  Vec out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = denormalize(j, row[j]);
  return out;
}

std::pair<Matrix, Normalization> normalize_dataset(const Matrix& raw) {
  enforce(raw.rows() >= 1, ErrorCode::kInvalidArgument, "cannot normalize an empty table");
  const std::size_t n = raw.rows();
  const std::size_t d = raw.cols();
  Normalization norm;
  norm.mean.assign(d, 0.0);
  norm.stddev.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += raw(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (raw(i, j) - mean) * (raw(i, j) - mean);
    var /= static_cast<double>(n);
    enforce(var > 0.0, ErrorCode::kConstantColumn,
            "column " + std::to_string(j) + " has zero variance");
    norm.mean[j] = mean;
    norm.stddev[j] = std::sqrt(var);
  }
  Matrix out(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out(i, j) = norm.normalize(j, raw(i, j));
  return {std::move(out), std::move(norm)};
}

void RaspKey::validate() const {
  const std::size_t ext = extended_dimensions();
  enforce(dimensions() >= 1, ErrorCode::kInvalidArgument, "key has no dimensions");
  enforce(a.rows() == ext && a.cols() == ext && a_inv.rows() == ext && a_inv.cols() == ext,
          ErrorCode::kInvalidArgument, "key matrix shape does not match d+2");
  noise.validate();
  enforce(max_abs_diff(a * a_inv, Matrix::identity(ext)) < 1e-9, ErrorCode::kInvalidArgument,
          "A * A^-1 deviates from identity");
}

RaspKey keygen(const Matrix& training, std::uint64_t seed, const KeygenOptions& options) {
  options.noise.validate();
  RaspKey key;
  key.ope = build_ope_key(training, options.buckets, options.beta);
  key.a = generate_invertible_matrix(training.cols() + 2, seed, options.matrix);
  key.a_inv = invert(key.a, options.matrix.condition_cap);
  key.noise = options.noise;
  key.envelope_key = EnvelopeKey::random();
  key.validate();
  return key;
}

Vec extend_and_project(const Matrix& a, std::span<const double> encoded, double noise) {
  enforce(a.cols() == encoded.size() + 2, ErrorCode::kInvalidArgument,
          "encoded vector does not match key dimensionality");
  Vec z(encoded.begin(), encoded.end());
  z.push_back(1.0);
  z.push_back(noise);
  return a.apply(z);
}

Vec recover_extended(const RaspKey& key, std::span<const double> y) { return key.a_inv.apply(y); }

Bytes encode_plain_record(const PlainRecord& record) {
  ByteWriter w;
  w.vec(record.values);
  w.bytes(record.payload);
  return std::move(w).take();
}

PlainRecord decode_plain_record(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  PlainRecord rec;
  rec.values = r.vec();
  rec.payload = r.bytes();
  r.expect_done();
  return rec;
}

PerturbedRecord perturb_with_noise(const RaspKey& key, const PlainRecord& record, double noise,
                                   RecordId id, const EnvelopeCipher& cipher) {
  PerturbedRecord out;
  out.id = id;
  out.y = extend_and_project(key.a, key.ope.encrypt(record.values), noise);
  out.envelope = cipher.seal(key.envelope_key, encode_plain_record(record));
  return out;
}

PerturbedRecord perturb(const RaspKey& key, const PlainRecord& record, Rng& rng, RecordId id,
                        const EnvelopeCipher& cipher) {
  return perturb_with_noise(key, record, sample_noise(key.noise, rng), id, cipher);
}

std::vector<PerturbedRecord> perturb_dataset(const RaspKey& key,
                                             std::span<const PlainRecord> records,
                                             std::uint64_t seed, RecordId first_id,
                                             const EnvelopeCipher& cipher) {
  Rng rng(seed);
  std::vector<PerturbedRecord> out;
  out.reserve(records.size());
  std::vector<std::size_t> failed;
  std::string first_message;
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      out.push_back(perturb(key, records[i], rng, first_id + i, cipher));
    } catch (const Error& e) {
      if (failed.empty()) first_message = e.what();
      failed.push_back(i);
    }
  }
  if (!failed.empty()) {
    std::ostringstream msg;
    msg << failed.size() << " record(s) failed to perturb (first at index " << failed.front()
        << ": " << first_message << ")";
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  return out;
}

PlainRecord open_envelope(const RaspKey& key, std::span<const std::uint8_t> envelope,
                          const EnvelopeCipher& cipher) {
  return decode_plain_record(cipher.open(key.envelope_key, envelope));
}

PlainRecord open_envelope(const RaspKey& key, const PerturbedRecord& record,
                          const EnvelopeCipher& cipher) {
  return open_envelope(key, record.envelope, cipher);
}

std::vector<PlainRecord> records_from_table(const Matrix& table) {
  std::vector<PlainRecord> out(table.rows());
  for (std::size_t i = 0; i < table.rows(); ++i) {
    auto row = table.row(i);
    out[i].values.assign(row.begin(), row.end());
  }
  return out;
}

}  // namespace rasp
