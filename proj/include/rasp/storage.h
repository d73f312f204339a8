#pragma once

// On-disk artifacts. Every file starts with four magic bytes and a version
// byte; the body uses the same little-endian codec as the wire.
//   RKEY  key file, proxy only
//   RDAT  perturbed dataset, what the server hosts
//   RIDX  R-tree over a perturbed dataset
//   RPLN  plaintext records (normalized values + payload), proxy/evaluator only

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "rasp/codec.h"
#include "rasp/index_store.h"
#include "rasp/perturbation.h"
#include "rasp/rtree.h"

namespace rasp {

inline constexpr std::uint8_t kFileVersion = 1;

Bytes read_file(const std::filesystem::path& path);
// Writes to a sibling temp file and renames over the target.
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

void write_key(ByteWriter& w, const RaspKey& key);
RaspKey read_key(ByteReader& r);

void save_key(const std::filesystem::path& path, const RaspKey& key);
RaspKey load_key(const std::filesystem::path& path);

void save_dataset(const std::filesystem::path& path, std::span<const PerturbedRecord> records);
std::vector<PerturbedRecord> load_dataset(const std::filesystem::path& path);

void save_index(const std::filesystem::path& path, const RTree& tree);
// The index only references point positions, so it is rebuilt against the
// dataset it was made from; mismatches are rejected.
IndexStore load_index(const std::filesystem::path& path, std::vector<PerturbedRecord> records);

void save_plain(const std::filesystem::path& path, std::span<const PlainRecord> records);
std::vector<PlainRecord> load_plain(const std::filesystem::path& path);

// Exposed for tests: header check on an in-memory artifact.
ByteReader open_artifact(std::span<const std::uint8_t> bytes, std::string_view magic);

}  // namespace rasp
