#pragma once

#include <terraverse/coevolution.hpp>

#include <json.hpp>

#include <filesystem>
#include <string>

namespace terraverse {

inline constexpr int config_version = 1;

/// Reads a JSON run config (`config_version` must be 1). TERRAVERSE_ENDPOINT,
/// when set, replaces the remote URL. Throws ConfigError.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json(const nlohmann::json& j);

/// Snapshot written to the run store; never contains the API key.
nlohmann::json config_to_json(const RunConfig& cfg);

/// 8 hex digits of FNV-1a over the canonical snapshot.
std::string config_hash(const RunConfig& cfg);

/// Applies TERRAVERSE_ENDPOINT if set.
void apply_environment(RunConfig& cfg);

} // namespace terraverse
