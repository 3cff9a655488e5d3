#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace fairguide {

inline constexpr const char* kToolVersion = "0.1.0";

// Written before any output artifact so a run can always be reproduced from
// its manifest. No timestamps: repeated runs must be byte-identical.
struct RunManifest {
  std::string command;
  nlohmann::json config;  // resolved flags, defaults materialized
  std::vector<std::pair<std::string, std::string>> inputs;  // path -> digest
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> outputs;
};

std::string file_digest(const std::string& path);
void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace fairguide
