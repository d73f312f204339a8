#pragma once

// The trusted side. Holds the key, turns plaintext queries into secure ones,
// talks to a backend and decrypts what comes back. Cost is split into
// pre-processing (query transformation), server time (round trips) and
// post-processing (decryption and filtering).

#include <chrono>
#include <optional>
#include <span>
#include <vector>

#include "rasp/filter.h"
#include "rasp/knn.h"
#include "rasp/perturbation.h"
#include "rasp/query.h"

namespace rasp {

struct ProxyTiming {
  double pre_seconds = 0.0;
  double server_seconds = 0.0;
  double post_seconds = 0.0;
  std::size_t round_trips = 0;

  double total() const noexcept { return pre_seconds + server_seconds + post_seconds; }
  ProxyTiming& operator+=(const ProxyTiming& o);
};

struct DecryptedRow {
  RecordId id = 0;
  PlainRecord record;
};

struct RangeAnswer {
  std::vector<DecryptedRow> rows;  // ascending id
  BlockCounter counters;
  std::size_t stage1_count = 0;
  std::size_t server_matches = 0;  // before strict-operator post-filtering
  ProxyTiming timing;
};

struct KnnAnswer {
  KnnResult result;
  ProxyTiming timing;
};

class Proxy {
 public:
  Proxy(const RaspKey& key, QueryBackend& backend,
        const EnvelopeCipher& cipher = default_cipher());

  // Closed bounds in the normalized domain. An empty range never leaves the
  // proxy.
  RangeAnswer range(const RangeQuerySpec& spec);
  // One secure query per disjunct, unioned by record id. Strict operators
  // are sent closed and enforced exactly after decryption.
  RangeAnswer filter(std::span<const std::vector<SimpleCondition>> disjuncts);
  KnnAnswer knn(std::span<const double> q, const KnnOptions& options);

 private:
  const RaspKey& key_;
  QueryBackend& backend_;
  const EnvelopeCipher& cipher_;
};

// Wraps a backend and accounts for the time spent inside it.
class TimedBackend final : public QueryBackend {
 public:
  explicit TimedBackend(QueryBackend& inner) : inner_(inner) {}
  QueryResult range(const SecureRangeQuery& q) override;
  InnerRangeResult inner_range(const KnnRequest& req) override;
  QueryResult outer_range(const SecureRangeQuery& q) override;

  double seconds() const noexcept { return seconds_; }
  std::size_t calls() const noexcept { return calls_; }
  // Clock reading when the first call began; nullopt before any call.
  std::optional<std::chrono::steady_clock::time_point> first_call() const { return first_; }

 private:
  template <typename F>
  auto timed(F&& f);
  QueryBackend& inner_;
  double seconds_ = 0.0;
  std::size_t calls_ = 0;
  std::optional<std::chrono::steady_clock::time_point> first_;
};

}  // namespace rasp
