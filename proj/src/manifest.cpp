#include "fairguide/manifest.hpp"

#include <cstdio>

#include "fairguide/common.hpp"
#include "fairguide/io.hpp"

namespace fairguide {

std::string file_digest(const std::string& path) {
  std::string bytes = read_text_file(path);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
  nlohmann::json j;
  j["command"] = manifest.command;
  j["config"] = manifest.config;
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& [p, digest] : manifest.inputs) inputs[p] = digest;
  j["inputs"] = inputs;
  j["seeds"] = manifest.seeds;
  j["outputs"] = manifest.outputs;
  j["tool_version"] = kToolVersion;
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace fairguide
