#include "rasp/wire.h"

#include <cmath>
#include <cstring>
#include <string>

namespace rasp {
namespace {

// version + tag + session
constexpr std::size_t kHeaderBytes = 1 + 1 + 8;

void write_mbr(ByteWriter& w, const Mbr& m) {
  w.count(m.dimensions());
  for (const Interval& iv : m.extent()) {
    w.f64(iv.lo);
    w.f64(iv.hi);
  }
}

Mbr read_mbr(ByteReader& r) {
  const std::size_t n = r.count();
  enforce(n <= r.remaining() / 16, ErrorCode::kMalformedMessage, "mbr longer than message");
  std::vector<Interval> ext(n);
  for (Interval& iv : ext) {
    iv.lo = r.f64();
    iv.hi = r.f64();
  }
  return Mbr(std::move(ext));
}

void write_counters(ByteWriter& w, const BlockCounter& c) {
  w.u64(c.index_blocks);
  w.u64(c.data_blocks);
}

BlockCounter read_counters(ByteReader& r) {
  BlockCounter c;
  c.index_blocks = r.u64();
  c.data_blocks = r.u64();
  return c;
}

void write_hits(ByteWriter& w, const std::vector<RecordId>& ids, const std::vector<Bytes>& env) {
  enforce(ids.size() == env.size(), ErrorCode::kInvalidArgument, "ids and envelopes differ in count");
  w.count(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    w.u64(ids[i]);
    w.bytes(env[i]);
  }
}

void read_hits(ByteReader& r, std::vector<RecordId>& ids, std::vector<Bytes>& env) {
  const std::size_t n = r.count();
  enforce(n <= r.remaining() / 12, ErrorCode::kMalformedMessage, "hit list longer than message");
  ids.resize(n);
  env.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = r.u64();
    env[i] = r.bytes();
  }
}

void write_request(ByteWriter& w, const KnnRequest& q) {
  write_secure_query(w, q.low);
  write_secure_query(w, q.high);
  w.u32(q.k);
  w.u32(q.delta);
  w.f64(q.epsilon);
}

KnnRequest read_request(ByteReader& r) {
  KnnRequest q;
  q.low = read_secure_query(r);
  q.high = read_secure_query(r);
  q.k = r.u32();
  q.delta = r.u32();
  q.epsilon = r.f64();
  enforce(std::isfinite(q.epsilon) && q.epsilon > 0.0 && q.epsilon < 1.0,
          ErrorCode::kMalformedMessage, "knn epsilon outside (0, 1)");
  return q;
}

void write_inner(ByteWriter& w, const InnerRangeResult& res) {
  w.count(res.trace.size());
  for (bool b : res.trace) w.u8(b ? 1 : 0);
  w.u64(res.count);
  w.u64(res.rounds);
  w.u8(res.reached_target ? 1 : 0);
}

bool read_flag(ByteReader& r) {
  const std::uint8_t b = r.u8();
  enforce(b <= 1, ErrorCode::kMalformedMessage, "flag byte is not 0 or 1");
  return b == 1;
}

InnerRangeResult read_inner(ByteReader& r) {
  InnerRangeResult res;
  const std::size_t n = r.count();
  enforce(n <= r.remaining(), ErrorCode::kMalformedMessage, "trace longer than message");
  res.trace.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.trace[i] = read_flag(r);
  res.count = r.u64();
  res.rounds = r.u64();
  res.reached_target = read_flag(r);
  return res;
}

void write_body(ByteWriter& w, const Payload& p) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, UploadDataset>) {
          w.u32(m.capacity);
          w.count(m.records.size());
          for (const PerturbedRecord& rec : m.records) write_record(w, rec);
        } else if constexpr (std::is_same_v<T, UploadAck>) {
          w.u64(m.records);
        } else if constexpr (std::is_same_v<T, RangeQueryMsg> || std::is_same_v<T, KnnOuter>) {
          write_secure_query(w, m.query);
        } else if constexpr (std::is_same_v<T, RangeResultMsg>) {
          write_hits(w, m.ids, m.envelopes);
          write_counters(w, m.counters);
          w.u64(m.stage1_count);
        } else if constexpr (std::is_same_v<T, KnnInit>) {
          write_request(w, m.request);
        } else if constexpr (std::is_same_v<T, KnnInner>) {
          write_inner(w, m.result);
        } else if constexpr (std::is_same_v<T, KnnCandidates>) {
          write_hits(w, m.ids, m.envelopes);
          write_counters(w, m.counters);
        } else {
          static_assert(std::is_same_v<T, ErrorMsg>);
          w.u32(static_cast<std::uint32_t>(m.code));
          w.str(m.message);
        }
      },
      p);
}

Payload read_body(MessageTag tag, ByteReader& r) {
  switch (tag) {
    case MessageTag::kUploadDataset: {
      UploadDataset m;
      m.capacity = r.u32();
      const std::size_t n = r.count();
      enforce(n <= r.remaining() / 16, ErrorCode::kMalformedMessage,
              "record list longer than message");
      m.records.reserve(n);
      for (std::size_t i = 0; i < n; ++i) m.records.push_back(read_record(r));
      return m;
    }
    case MessageTag::kUploadAck:
      return UploadAck{r.u64()};
    case MessageTag::kRangeQuery:
      return RangeQueryMsg{read_secure_query(r)};
    case MessageTag::kRangeResult: {
      RangeResultMsg m;
      read_hits(r, m.ids, m.envelopes);
      m.counters = read_counters(r);
      m.stage1_count = r.u64();
      return m;
    }
    case MessageTag::kKnnInit:
      return KnnInit{read_request(r)};
    case MessageTag::kKnnInner:
      return KnnInner{read_inner(r)};
    case MessageTag::kKnnOuter:
      return KnnOuter{read_secure_query(r)};
    case MessageTag::kKnnCandidates: {
      KnnCandidates m;
      read_hits(r, m.ids, m.envelopes);
      m.counters = read_counters(r);
      return m;
    }
    case MessageTag::kError: {
      ErrorMsg m;
      const std::uint32_t code = r.u32();
      enforce(code >= static_cast<std::uint32_t>(ErrorCode::kInvalidArgument) &&
                  code <= static_cast<std::uint32_t>(ErrorCode::kInternal),
              ErrorCode::kMalformedMessage, "unknown error code " + std::to_string(code));
      m.code = static_cast<ErrorCode>(code);
      m.message = r.str();
      return m;
    }
  }
  throw Error(ErrorCode::kMalformedMessage,
              "unknown message tag " + std::to_string(static_cast<int>(tag)));
}

}  // namespace

MessageTag tag_of(const Payload& p) {
  // Variant alternatives are declared in tag order.
  return static_cast<MessageTag>(p.index() + 1);
}

void write_record(ByteWriter& w, const PerturbedRecord& r) {
  w.u64(r.id);
  w.vec(r.y);
  w.bytes(r.envelope);
}

PerturbedRecord read_record(ByteReader& r) {
  PerturbedRecord rec;
  rec.id = r.u64();
  rec.y = r.vec();
  rec.envelope = r.bytes();
  return rec;
}

void write_secure_query(ByteWriter& w, const SecureRangeQuery& q) {
  write_mbr(w, q.mbr);
  w.count(q.thetas.size());
  for (const ThetaMatrix& t : q.thetas) {
    w.u32(static_cast<std::uint32_t>(t.dim));
    w.u8(static_cast<std::uint8_t>(t.side));
    w.matrix(t.m);
  }
}

SecureRangeQuery read_secure_query(ByteReader& r) {
  SecureRangeQuery q;
  q.mbr = read_mbr(r);
  const std::size_t n = r.count();
  enforce(n <= r.remaining() / 13, ErrorCode::kMalformedMessage, "theta list longer than message");
  q.thetas.resize(n);
  for (ThetaMatrix& t : q.thetas) {
    t.dim = r.u32();
    const std::uint8_t side = r.u8();
    enforce(side <= 1, ErrorCode::kMalformedMessage, "bad bound side");
    t.side = static_cast<BoundSide>(side);
    t.m = r.matrix();
  }
  return q;
}

Bytes encode_message(const Message& m) {
  ByteWriter body;
  body.u8(kProtocolVersion);
  body.u8(static_cast<std::uint8_t>(tag_of(m.payload)));
  body.u64(m.session);
  write_body(body, m.payload);
  const Bytes& b = body.data();
  enforce(b.size() <= kMaxFrameBytes, ErrorCode::kInvalidArgument, "message exceeds frame limit");
  Bytes frame(4 + b.size());
  const auto len = static_cast<std::uint32_t>(b.size());
  for (int i = 0; i < 4; ++i) frame[i] = static_cast<std::uint8_t>(len >> (8 * i));
  std::memcpy(frame.data() + 4, b.data(), b.size());
  return frame;
}

std::uint32_t frame_length(std::span<const std::uint8_t, 4> prefix) {
  ByteReader r(prefix);
  const std::uint32_t n = r.u32();
  enforce(n >= kHeaderBytes, ErrorCode::kMalformedMessage, "frame shorter than its header");
  enforce(n <= kMaxFrameBytes, ErrorCode::kMalformedMessage, "frame exceeds size limit");
  return n;
}

Message decode_message(std::span<const std::uint8_t> frame) {
  enforce(frame.size() >= 4 + kHeaderBytes, ErrorCode::kMalformedMessage, "truncated frame");
  const std::uint32_t len = frame_length(frame.first<4>());
  enforce(frame.size() - 4 == len, ErrorCode::kMalformedMessage,
          "frame length prefix does not match payload");
  ByteReader r(frame.subspan(4));
  const std::uint8_t version = r.u8();
  enforce(version == kProtocolVersion, ErrorCode::kVersionMismatch,
          "protocol version " + std::to_string(version) + ", expected " +
              std::to_string(kProtocolVersion));
  const auto tag = static_cast<MessageTag>(r.u8());
  Message m;
  m.session = r.u64();
  try {
    m.payload = read_body(tag, r);
  } catch (const Error& e) {
    // Short reads inside the body surface as kMalformedMessage regardless of
    // which reader tripped.
    if (e.code() == ErrorCode::kMalformedMessage) throw;
    throw Error(ErrorCode::kMalformedMessage, e.what());
  }
  enforce(r.done(), ErrorCode::kMalformedMessage, "trailing bytes after message body");
  return m;
}

RangeResultMsg to_message(const QueryResult& r) {
  return RangeResultMsg{r.ids, r.envelopes, r.counters, r.stage1_count};
}

QueryResult from_message(const RangeResultMsg& m) {
  return QueryResult{m.ids, m.envelopes, m.counters, static_cast<std::size_t>(m.stage1_count)};
}

KnnCandidates to_candidates(const QueryResult& r) {
  return KnnCandidates{r.ids, r.envelopes, r.counters};
}

QueryResult from_candidates(const KnnCandidates& m) {
  return QueryResult{m.ids, m.envelopes, m.counters, m.ids.size()};
}

}  // namespace rasp
