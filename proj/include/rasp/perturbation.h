#pragma once

// The RASP transform y = A (E_ope(x), 1, v) and everything the data owner
// needs around it: normalization, key generation, record envelopes.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rasp/envelope.h"
#include "rasp/linalg.h"
#include "rasp/ope.h"

namespace rasp {

using RecordId = std::uint64_t;

// Per-column z-score parameters.
struct Normalization {
  std::vector<double> mean;
  std::vector<double> stddev;

  double normalize(std::size_t dim, double x) const { return (x - mean[dim]) / stddev[dim]; }
  double denormalize(std::size_t dim, double z) const { return z * stddev[dim] + mean[dim]; }
  Vec normalize(std::span<const double> row) const;
  Vec denormalize(std::span<const double> row) const;

  friend bool operator==(const Normalization&, const Normalization&) = default;
};

// Population mean/stddev per column. Throws kConstantColumn on zero variance.
std::pair<Matrix, Normalization> normalize_dataset(const Matrix& raw);

struct PlainRecord {
  Vec values;      // searchable attributes, normalized domain
  Bytes payload;   // non-searchable attributes, opaque

  friend bool operator==(const PlainRecord&, const PlainRecord&) = default;
};

struct PerturbedRecord {
  RecordId id = 0;
  Vec y;           // d+2 perturbed coordinates
  Bytes envelope;  // sealed PlainRecord

  friend bool operator==(const PerturbedRecord&, const PerturbedRecord&) = default;
};

// Never leaves the proxy.
struct RaspKey {
  Matrix a;
  Matrix a_inv;
  OpeKey ope;
  NoiseSpec noise;
  EnvelopeKey envelope_key;

  std::size_t dimensions() const noexcept { return ope.dimensions(); }
  std::size_t extended_dimensions() const noexcept { return dimensions() + 2; }
  // Throws kInvalidArgument when shapes disagree or A * A_inv drifts from I.
  void validate() const;
};

struct KeygenOptions {
  std::size_t buckets = kDefaultBuckets;
  double beta = kDefaultBeta;
  NoiseSpec noise;
  InvertibleMatrixOptions matrix;
};

// training is the normalized n x d table the OPE buckets are fitted on.
// A is a deterministic function of seed; the envelope key is fresh.
RaspKey keygen(const Matrix& training, std::uint64_t seed, const KeygenOptions& options = {});

// A * (encoded, 1, v).
Vec extend_and_project(const Matrix& a, std::span<const double> encoded, double noise);

// A^-1 y, i.e. (E_ope(x), 1, v) for a record perturbed with this key.
Vec recover_extended(const RaspKey& key, std::span<const double> y);

Bytes encode_plain_record(const PlainRecord& record);
PlainRecord decode_plain_record(std::span<const std::uint8_t> bytes);

PerturbedRecord perturb(const RaspKey& key, const PlainRecord& record, Rng& rng, RecordId id = 0,
                        const EnvelopeCipher& cipher = default_cipher());

// Same as perturb with the noise value supplied by the caller.
PerturbedRecord perturb_with_noise(const RaspKey& key, const PlainRecord& record, double noise,
                                   RecordId id = 0,
                                   const EnvelopeCipher& cipher = default_cipher());

// Ids are assigned sequentially from first_id in input order.
std::vector<PerturbedRecord> perturb_dataset(const RaspKey& key,
                                             std::span<const PlainRecord> records,
                                             std::uint64_t seed, RecordId first_id = 0,
                                             const EnvelopeCipher& cipher = default_cipher());

PlainRecord open_envelope(const RaspKey& key, const PerturbedRecord& record,
                          const EnvelopeCipher& cipher = default_cipher());
PlainRecord open_envelope(const RaspKey& key, std::span<const std::uint8_t> envelope,
                          const EnvelopeCipher& cipher = default_cipher());

// Convenience: one PlainRecord per table row, empty payloads.
std::vector<PlainRecord> records_from_table(const Matrix& table);

}  // namespace rasp
