#include "rasp/proxy.h"

#include <algorithm>
#include <map>

namespace rasp {
namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0, Clock::time_point t1) {
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

ProxyTiming& ProxyTiming::operator+=(const ProxyTiming& o) {
  pre_seconds += o.pre_seconds;
  server_seconds += o.server_seconds;
  post_seconds += o.post_seconds;
  round_trips += o.round_trips;
  return *this;
}

template <typename F>
auto TimedBackend::timed(F&& f) {
  const auto t0 = Clock::now();
  if (!first_) first_ = t0;
  ++calls_;
  struct Stop {
    TimedBackend* self;
    Clock::time_point t0;
    ~Stop() { self->seconds_ += since(t0, Clock::now()); }
  } stop{this, t0};
  return f();
}

QueryResult TimedBackend::range(const SecureRangeQuery& q) {
  return timed([&] { return inner_.range(q); });
}
InnerRangeResult TimedBackend::inner_range(const KnnRequest& req) {
  return timed([&] { return inner_.inner_range(req); });
}
QueryResult TimedBackend::outer_range(const SecureRangeQuery& q) {
  return timed([&] { return inner_.outer_range(q); });
}

Proxy::Proxy(const RaspKey& key, QueryBackend& backend, const EnvelopeCipher& cipher)
    : key_(key), backend_(backend), cipher_(cipher) {}

RangeAnswer Proxy::range(const RangeQuerySpec& spec) {
  RangeAnswer out;
  const auto t0 = Clock::now();
  enforce(spec.dimensions() == key_.dimensions(), ErrorCode::kInvalidArgument,
          "query has " + std::to_string(spec.dimensions()) + " dimensions, key has " +
              std::to_string(key_.dimensions()));
  if (spec.is_empty()) {
    out.timing.pre_seconds = since(t0, Clock::now());
    return out;
  }
  const SecureRangeQuery q = transform_query(key_, spec);
  const auto t1 = Clock::now();
  const QueryResult res = backend_.range(q);
  const auto t2 = Clock::now();
  out.rows.reserve(res.ids.size());
  for (std::size_t i = 0; i < res.ids.size(); ++i) {
    out.rows.push_back({res.ids[i], open_envelope(key_, res.envelopes[i], cipher_)});
  }
  out.counters = res.counters;
  out.stage1_count = res.stage1_count;
  out.server_matches = res.ids.size();
  out.timing = {since(t0, t1), since(t1, t2), since(t2, Clock::now()), 1};
  return out;
}

RangeAnswer Proxy::filter(std::span<const std::vector<SimpleCondition>> disjuncts) {
  RangeAnswer out;
  std::map<RecordId, PlainRecord> merged;
  for (const auto& conds : disjuncts) {
    const auto t0 = Clock::now();
    const RangeQuerySpec spec = RangeQuerySpec::from_conditions(key_.dimensions(), conds);
    out.timing.pre_seconds += since(t0, Clock::now());
    RangeAnswer part = range(spec);
    const auto t1 = Clock::now();
    out.timing += part.timing;
    out.counters += part.counters;
    out.stage1_count += part.stage1_count;
    out.server_matches += part.server_matches;
    for (auto& row : part.rows) {
      const bool keep = std::all_of(conds.begin(), conds.end(), [&](const SimpleCondition& c) {
        return condition_holds(c, row.record.values);
      });
      if (keep) merged.emplace(row.id, std::move(row.record));
    }
    out.timing.post_seconds += since(t1, Clock::now());
  }
  const auto t2 = Clock::now();
  out.rows.reserve(merged.size());
  for (auto& [id, rec] : merged) out.rows.push_back({id, std::move(rec)});
  out.timing.post_seconds += since(t2, Clock::now());
  return out;
}

KnnAnswer Proxy::knn(std::span<const double> q, const KnnOptions& options) {
  TimedBackend timed(backend_);
  const auto t0 = Clock::now();
  KnnAnswer out;
  out.result = knn_query(key_, timed, q, options, cipher_);
  const double total = since(t0, Clock::now());
  const double pre = timed.first_call() ? since(t0, *timed.first_call()) : total;
  out.timing.pre_seconds = pre;
  out.timing.server_seconds = timed.seconds();
  out.timing.post_seconds = std::max(0.0, total - pre - timed.seconds());
  out.timing.round_trips = timed.calls();
  return out;
}

}  // namespace rasp
