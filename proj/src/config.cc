#include "rasp/config.h"

#include <cmath>
#include <cstdlib>
#include <set>
#include <string>

#include <json.hpp>

#include "rasp/storage.h"

namespace rasp {
namespace {

using nlohmann::json;

template <typename T>
void take(const json& j, const char* name, T& out) {
  if (!j.contains(name)) return;
  try {
    out = j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config field ") + name + ": " + e.what());
  }
}

}  // namespace

BoundPolicy parse_bound_policy(std::string_view s) {
  if (s == "user") return BoundPolicy::kUserBound;
  if (s == "center") return BoundPolicy::kCenterDistance;
  if (s == "full") return BoundPolicy::kFullDomain;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown bound policy '" + std::string(s) + "' (user|center|full)");
}

std::string_view bound_policy_name(BoundPolicy p) {
  switch (p) {
    case BoundPolicy::kUserBound: return "user";
    case BoundPolicy::kCenterDistance: return "center";
    case BoundPolicy::kFullDomain: return "full";
  }
  return "user";
}

KeygenOptions ServiceConfig::keygen_options() const {
  KeygenOptions o;
  o.buckets = buckets;
  o.beta = beta;
  o.noise = noise();
  return o;
}

KnnOptions ServiceConfig::knn_options(std::size_t k) const {
  KnnOptions o;
  o.k = k;
  o.delta = knn_delta;
  o.epsilon = knn_epsilon;
  o.bounds = bounds;
  return o;
}

void ServiceConfig::validate() const {
  enforce(buckets >= 2, ErrorCode::kInvalidArgument, "buckets must be >= 2");
  enforce(std::isfinite(beta) && beta > 0.0, ErrorCode::kInvalidArgument, "beta must be > 0");
  noise().validate();
  enforce(capacity >= 4, ErrorCode::kInvalidArgument, "index capacity must be >= 4");
  enforce(knn_epsilon > 0.0 && knn_epsilon < 1.0, ErrorCode::kInvalidArgument,
          "knn_epsilon must lie in (0, 1)");
  enforce(bounds.edge_fraction > 0.0 && std::isfinite(bounds.edge_fraction),
          ErrorCode::kInvalidArgument, "edge_fraction must be > 0");
  enforce(bounds.center_epsilon > 0.0 && std::isfinite(bounds.center_epsilon),
          ErrorCode::kInvalidArgument, "center_epsilon must be > 0");
}

ServiceConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
  enforce(j.is_object(), ErrorCode::kInvalidArgument, "config must be a JSON object");
  static const std::set<std::string> known = {
      "buckets",    "beta",           "v0",        "v1",       "capacity",
      "split",      "knn_epsilon",    "knn_delta", "bound_policy", "edge_fraction",
      "center_epsilon", "key_seed",   "noise_seed", "host",    "port"};
  for (const auto& [k, _] : j.items()) {
    enforce(known.count(k) == 1, ErrorCode::kInvalidArgument, "unknown config field '" + k + "'");
  }
  ServiceConfig c;
  take(j, "buckets", c.buckets);
  take(j, "beta", c.beta);
  take(j, "v0", c.v0);
  take(j, "v1", c.v1);
  take(j, "capacity", c.capacity);
  take(j, "knn_epsilon", c.knn_epsilon);
  take(j, "knn_delta", c.knn_delta);
  take(j, "edge_fraction", c.bounds.edge_fraction);
  take(j, "center_epsilon", c.bounds.center_epsilon);
  take(j, "key_seed", c.key_seed);
  take(j, "noise_seed", c.noise_seed);
  take(j, "host", c.host);
  take(j, "port", c.port);
  std::string s;
  if (j.contains("split")) {
    take(j, "split", s);
    if (s == "rstar") c.split = SplitPolicy::kRStar;
    else if (s == "quadratic") c.split = SplitPolicy::kQuadratic;
    else throw Error(ErrorCode::kInvalidArgument, "split must be rstar or quadratic");
  }
  if (j.contains("bound_policy")) {
    take(j, "bound_policy", s);
    c.bounds.policy = parse_bound_policy(s);
  }
  c.validate();
  return c;
}

std::string config_to_json(const ServiceConfig& c) {
  json j = {
      {"buckets", c.buckets},
      {"beta", c.beta},
      {"v0", c.v0},
      {"v1", c.v1},
      {"capacity", c.capacity},
      {"split", c.split == SplitPolicy::kRStar ? "rstar" : "quadratic"},
      {"knn_epsilon", c.knn_epsilon},
      {"knn_delta", c.knn_delta},
      {"bound_policy", std::string(bound_policy_name(c.bounds.policy))},
      {"edge_fraction", c.bounds.edge_fraction},
      {"center_epsilon", c.bounds.center_epsilon},
      {"key_seed", c.key_seed},
      {"noise_seed", c.noise_seed},
      {"host", c.host},
      {"port", c.port},
  };
  return j.dump(2);
}

std::optional<std::filesystem::path> resolve_config_path(
    const std::optional<std::filesystem::path>& explicit_path) {
  if (explicit_path) return explicit_path;
  if (const char* env = std::getenv(kConfigEnvVar); env != nullptr && *env != '\0') {
    return std::filesystem::path(env);
  }
  return std::nullopt;
}

ServiceConfig load_config(const std::optional<std::filesystem::path>& explicit_path) {
  const auto path = resolve_config_path(explicit_path);
  if (!path) return ServiceConfig{};
  const Bytes bytes = read_file(*path);
  return config_from_json(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace rasp
