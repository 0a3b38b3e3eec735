#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "roadsearch/road.hpp"
#include "roadsearch/search.hpp"
#include "roadsearch/simulator.hpp"

namespace roadsearch::harness {

inline constexpr const char* kVersion = "0.1.0";

/// Configuration problem; the message starts with the offending key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key_path, const std::string& what)
      : std::runtime_error(key_path.empty() ? what : key_path + ": " + what), key_path_(key_path) {}

  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

struct SutDescriptor {
  enum class Kind { kBuiltin, kExternal };

  Kind kind{Kind::kBuiltin};
  std::string command;
  double timeout{30.0};

  static SutDescriptor external(std::string cmd, double timeout_s = 30.0) {
    return {Kind::kExternal, std::move(cmd), timeout_s};
  }

  friend bool operator==(const SutDescriptor&, const SutDescriptor&) = default;
};

struct HarnessConfig {
  search::SearchConfig search;
  road::RoadParams road;
  sim::VehicleParams vehicle;
  sim::SimSettings simulation;
  SutDescriptor sut;

  friend bool operator==(const HarnessConfig&, const HarnessConfig&) = default;
};

/// Reads a JSON config file. An empty file yields all defaults; unknown keys,
/// type mismatches and out-of-range values raise ConfigError.
HarnessConfig parse_config(const std::filesystem::path& path);
HarnessConfig parse_config_json(const nlohmann::json& doc);
HarnessConfig parse_config_text(const std::string& text);

nlohmann::json to_json(const HarnessConfig& config);

}  // namespace roadsearch::harness
