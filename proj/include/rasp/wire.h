#pragma once

// Proxy <-> server messages. Frame layout (little-endian):
//   u32 length of what follows | u8 version | u8 tag | u64 session | body
// Matrices travel row-major as raw 64-bit floats, counts as u32.

#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "rasp/codec.h"
#include "rasp/error.h"
#include "rasp/index_store.h"
#include "rasp/knn.h"
#include "rasp/query.h"

namespace rasp {

inline constexpr std::uint8_t kProtocolVersion = 1;
// Upper bound on a single frame; larger length prefixes are rejected
// before any allocation.
inline constexpr std::uint32_t kMaxFrameBytes = 1u << 30;

enum class MessageTag : std::uint8_t {
  kUploadDataset = 1,
  kUploadAck = 2,
  kRangeQuery = 3,
  kRangeResult = 4,
  kKnnInit = 5,
  kKnnInner = 6,
  kKnnOuter = 7,
  kKnnCandidates = 8,
  kError = 9,
};

struct UploadDataset {
  std::vector<PerturbedRecord> records;
  std::uint32_t capacity = kDefaultNodeCapacity;
  friend bool operator==(const UploadDataset&, const UploadDataset&) = default;
};

struct UploadAck {
  std::uint64_t records = 0;
  friend bool operator==(const UploadAck&, const UploadAck&) = default;
};

struct RangeQueryMsg {
  SecureRangeQuery query;
  friend bool operator==(const RangeQueryMsg&, const RangeQueryMsg&) = default;
};

struct RangeResultMsg {
  std::vector<RecordId> ids;
  std::vector<Bytes> envelopes;
  BlockCounter counters;
  std::uint64_t stage1_count = 0;
  friend bool operator==(const RangeResultMsg&, const RangeResultMsg&) = default;
};

struct KnnInit {
  KnnRequest request;
  friend bool operator==(const KnnInit& a, const KnnInit& b) {
    return a.request.low == b.request.low && a.request.high == b.request.high &&
           a.request.k == b.request.k && a.request.delta == b.request.delta &&
           a.request.epsilon == b.request.epsilon;
  }
};

struct KnnInner {
  InnerRangeResult result;
  friend bool operator==(const KnnInner&, const KnnInner&) = default;
};

struct KnnOuter {
  SecureRangeQuery query;
  friend bool operator==(const KnnOuter&, const KnnOuter&) = default;
};

struct KnnCandidates {
  std::vector<RecordId> ids;
  std::vector<Bytes> envelopes;
  BlockCounter counters;
  friend bool operator==(const KnnCandidates&, const KnnCandidates&) = default;
};

struct ErrorMsg {
  ErrorCode code = ErrorCode::kInternal;
  std::string message;
  friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

using Payload = std::variant<UploadDataset, UploadAck, RangeQueryMsg, RangeResultMsg, KnnInit,
                             KnnInner, KnnOuter, KnnCandidates, ErrorMsg>;

struct Message {
  std::uint64_t session = 0;
  Payload payload;
  friend bool operator==(const Message&, const Message&) = default;
};

namespace detail {
template <typename T>
inline constexpr bool is_key_material =
    std::is_same_v<T, RaspKey> || std::is_same_v<T, OpeKey> ||
    std::is_same_v<T, OpeDimensionKey> || std::is_same_v<T, EnvelopeKey>;

template <typename V>
struct carries_key;
template <typename... Ts>
struct carries_key<std::variant<Ts...>> : std::bool_constant<(is_key_material<Ts> || ...)> {};
}  // namespace detail

static_assert(!detail::carries_key<Payload>::value, "key material must never be a message");

MessageTag tag_of(const Payload& p);

// Full frame including the length prefix.
Bytes encode_message(const Message& m);
// Accepts exactly one full frame.
Message decode_message(std::span<const std::uint8_t> frame);
// Reads the length prefix of a frame header (4 bytes); validates the bound.
std::uint32_t frame_length(std::span<const std::uint8_t, 4> prefix);

RangeResultMsg to_message(const QueryResult& r);
QueryResult from_message(const RangeResultMsg& m);
KnnCandidates to_candidates(const QueryResult& r);
QueryResult from_candidates(const KnnCandidates& m);

// Shared by the wire and the dataset file.
void write_record(ByteWriter& w, const PerturbedRecord& r);
PerturbedRecord read_record(ByteReader& r);
void write_secure_query(ByteWriter& w, const SecureRangeQuery& q);
SecureRangeQuery read_secure_query(ByteReader& r);

}  // namespace rasp
