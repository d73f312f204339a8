#include "rasp/storage.h"

#include <fstream>
#include <iterator>
#include <string>

#include "rasp/wire.h"

namespace rasp {
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kKeyMagic = "RKEY";
constexpr std::string_view kDatasetMagic = "RDAT";
constexpr std::string_view kIndexMagic = "RIDX";
constexpr std::string_view kPlainMagic = "RPLN";

ByteWriter start_artifact(std::string_view magic) {
  ByteWriter w;
  for (char c : magic) w.u8(static_cast<std::uint8_t>(c));
  w.u8(kFileVersion);
  return w;
}

void write_ope_dim(ByteWriter& w, const OpeDimensionKey& k) {
  w.vec(k.source_boundaries());
  w.vec(k.target_boundaries());
  w.f64(k.beta());
}

OpeDimensionKey read_ope_dim(ByteReader& r) {
  Vec source = r.vec();
  Vec target = r.vec();
  const double beta = r.f64();
  try {
    return OpeDimensionKey(std::move(source), std::move(target), beta);
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedMessage, std::string("bad OPE table: ") + e.what());
  }
}

}  // namespace

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  enforce(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + path.string());
  Bytes out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  enforce(!in.bad(), ErrorCode::kIo, "read failed: " + path.string());
  return out;
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    enforce(static_cast<bool>(out), ErrorCode::kIo, "cannot create " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    enforce(static_cast<bool>(out), ErrorCode::kIo, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  enforce(!ec, ErrorCode::kIo, "cannot replace " + path.string() + ": " + ec.message());
}

ByteReader open_artifact(std::span<const std::uint8_t> bytes, std::string_view magic) {
  enforce(bytes.size() >= magic.size() + 1, ErrorCode::kMalformedMessage, "file too short");
  for (std::size_t i = 0; i < magic.size(); ++i) {
    enforce(bytes[i] == static_cast<std::uint8_t>(magic[i]), ErrorCode::kMalformedMessage,
            "wrong file type, expected " + std::string(magic));
  }
  const std::uint8_t version = bytes[magic.size()];
  enforce(version == kFileVersion, ErrorCode::kVersionMismatch,
          std::string(magic) + " file version " + std::to_string(version));
  return ByteReader(bytes.subspan(magic.size() + 1));
}

void write_key(ByteWriter& w, const RaspKey& key) {
  w.matrix(key.a);
  w.matrix(key.a_inv);
  w.count(key.ope.buckets);
  w.count(key.ope.dims.size());
  for (const auto& d : key.ope.dims) write_ope_dim(w, d);
  w.f64(key.noise.v0);
  w.f64(key.noise.v1);
  w.raw(key.envelope_key.bytes);
}

RaspKey read_key(ByteReader& r) {
  RaspKey key;
  key.a = r.matrix();
  key.a_inv = r.matrix();
  key.ope.buckets = r.count();
  const std::size_t d = r.count();
  enforce(d <= r.remaining() / 24, ErrorCode::kMalformedMessage, "OPE table count too large");
  key.ope.dims.reserve(d);
  for (std::size_t i = 0; i < d; ++i) key.ope.dims.push_back(read_ope_dim(r));
  key.noise.v0 = r.f64();
  key.noise.v1 = r.f64();
  const auto env = r.raw(key.envelope_key.bytes.size());
  std::copy(env.begin(), env.end(), key.envelope_key.bytes.begin());
  try {
    key.noise.validate();
    key.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedMessage, std::string("inconsistent key: ") + e.what());
  }
  return key;
}

void save_key(const fs::path& path, const RaspKey& key) {
  ByteWriter w = start_artifact(kKeyMagic);
  write_key(w, key);
  write_file(path, w.data());
  std::error_code ec;
  fs::permissions(path, fs::perms::owner_read | fs::perms::owner_write, fs::perm_options::replace,
                  ec);
}

RaspKey load_key(const fs::path& path) {
  const Bytes bytes = read_file(path);
  ByteReader r = open_artifact(bytes, kKeyMagic);
  RaspKey key = read_key(r);
  r.expect_done();
  return key;
}

void save_dataset(const fs::path& path, std::span<const PerturbedRecord> records) {
  ByteWriter w = start_artifact(kDatasetMagic);
  w.count(records.size());
  for (const auto& rec : records) write_record(w, rec);
  write_file(path, w.data());
}

std::vector<PerturbedRecord> load_dataset(const fs::path& path) {
  const Bytes bytes = read_file(path);
  ByteReader r = open_artifact(bytes, kDatasetMagic);
  const std::size_t n = r.count();
  enforce(n <= r.remaining() / 16, ErrorCode::kMalformedMessage, "record count too large");
  std::vector<PerturbedRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(read_record(r));
  r.expect_done();
  return out;
}

void save_index(const fs::path& path, const RTree& tree) {
  ByteWriter w = start_artifact(kIndexMagic);
  w.count(tree.size());
  tree.write(w);
  write_file(path, w.data());
}

IndexStore load_index(const fs::path& path, std::vector<PerturbedRecord> records) {
  const Bytes bytes = read_file(path);
  ByteReader r = open_artifact(bytes, kIndexMagic);
  const std::size_t n = r.count();
  enforce(n == records.size(), ErrorCode::kMalformedMessage,
          "index covers " + std::to_string(n) + " points, dataset has " +
              std::to_string(records.size()));
  std::vector<double> points;
  if (!records.empty()) points.reserve(n * records.front().y.size());
  for (const auto& rec : records) points.insert(points.end(), rec.y.begin(), rec.y.end());
  RTree tree = RTree::read(r, std::move(points));
  r.expect_done();
  return IndexStore(std::move(records), std::move(tree));
}

void save_plain(const fs::path& path, std::span<const PlainRecord> records) {
  ByteWriter w = start_artifact(kPlainMagic);
  w.count(records.size());
  for (const auto& rec : records) {
    w.vec(rec.values);
    w.bytes(rec.payload);
  }
  write_file(path, w.data());
}

std::vector<PlainRecord> load_plain(const fs::path& path) {
  const Bytes bytes = read_file(path);
  ByteReader r = open_artifact(bytes, kPlainMagic);
  const std::size_t n = r.count();
  enforce(n <= r.remaining() / 8, ErrorCode::kMalformedMessage, "record count too large");
  std::vector<PlainRecord> out(n);
  for (auto& rec : out) {
    rec.values = r.vec();
    rec.payload = r.bytes();
  }
  r.expect_done();
  return out;
}

}  // namespace rasp
