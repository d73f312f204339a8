#pragma once

// Service configuration. Every field has the library default; a JSON file
// may override any subset. Unknown keys are rejected so typos surface.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "rasp/knn.h"
#include "rasp/perturbation.h"

namespace rasp {

inline constexpr const char* kConfigEnvVar = "RASP_CONFIG";

struct ServiceConfig {
  std::size_t buckets = kDefaultBuckets;
  double beta = kDefaultBeta;
  double v0 = 4.0;
  double v1 = 8.0;
  std::size_t capacity = kDefaultNodeCapacity;
  SplitPolicy split = SplitPolicy::kRStar;
  double knn_epsilon = 1e-6;
  std::size_t knn_delta = 0;
  BoundOptions bounds;
  std::uint64_t key_seed = 1;
  std::uint64_t noise_seed = 2;
  std::string host = "127.0.0.1";
  std::uint16_t port = 7411;

  KeygenOptions keygen_options() const;
  NoiseSpec noise() const { return {v0, v1}; }
  KnnOptions knn_options(std::size_t k) const;
  // Throws kInvalidArgument on out-of-range values.
  void validate() const;
};

ServiceConfig config_from_json(std::string_view text);
std::string config_to_json(const ServiceConfig& c);

// explicit_path wins over the environment variable; with neither, defaults.
std::optional<std::filesystem::path> resolve_config_path(
    const std::optional<std::filesystem::path>& explicit_path);
ServiceConfig load_config(const std::optional<std::filesystem::path>& explicit_path);

BoundPolicy parse_bound_policy(std::string_view s);
std::string_view bound_policy_name(BoundPolicy p);

}  // namespace rasp
