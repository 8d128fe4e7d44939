#pragma once

// Run manifests: what was run, on what, and the SHA-256 of every byte it
// produced, so a later run can be checked hash for hash.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace pinembed::cli {

inline constexpr const char* kStdoutKey = "<stdout>";

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

struct RunManifest {
  std::string tool_version;
  std::string command;
  std::vector<std::string> argv;
  nlohmann::json spec;   // null when the command has no spec
  nlohmann::json seeds;  // object, possibly empty
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // path or <stdout> -> sha256
  double wall_seconds = 0.0;
  int exit_code = 0;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace pinembed::cli
