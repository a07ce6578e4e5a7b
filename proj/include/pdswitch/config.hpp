#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pdswitch/model.hpp"
#include "pdswitch/registry.hpp"

namespace pdswitch {

// Bad or missing configuration; the CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DriftConditionSpec {
  Mode k0 = 1;
  ModeValues eta{1.0};
};

/// Model config file:
///   {"name": ..., "params": {...}, "dim": n, "brownian_dim": d,
///    "rate_bound": M, "truncation_hint": N,
///    "initial": {"x0": [...], "mode": i},
///    "assumptions": {"elliptic": bool, "drift_condition": {"k0": k, "eta": [...]}}}
/// dim, brownian_dim and rate_bound are optional; when given they must agree
/// with the registered family (rate_bound may only loosen M).
struct ModelConfig {
  std::string name;
  nlohmann::json params;
  Mode truncation_hint = 30;
  Vector x0;
  Mode i0 = 1;
  std::optional<bool> elliptic;  // user-asserted; absent means not asserted
  std::optional<DriftConditionSpec> drift_condition;
  std::string hash;  // FNV-1a 64 of the file bytes, hex
  RegisteredModel built;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

// Throws ConfigError; the message names the file when it cannot be read.
ModelConfig load_model_config(const std::filesystem::path& path);
ModelConfig parse_model_config(const std::string& text);

}  // namespace pdswitch
