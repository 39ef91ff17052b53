#pragma once

// One JSON line per run: enough to rerun it and to verify its outputs.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace walkrg::cli {

using json = nlohmann::json;

struct OutputDigest {
  std::string file;  ///< relative to the output directory
  std::string sha256;
  std::uint64_t bytes = 0;
  friend bool operator==(const OutputDigest&, const OutputDigest&) = default;
};

struct RunManifest {
  std::string subcommand;
  json params = json::object();
  std::uint64_t seed = 0;
  std::string code_version;
  std::string started;   ///< UTC, ISO 8601 with milliseconds
  std::string finished;
  unsigned threads = 1;
  bool check_requested = false;
  bool check_passed = true;
  std::vector<OutputDigest> outputs;

  json to_json() const;
  static RunManifest from_json(const json& j);
  std::string to_line() const { return to_json().dump(); }
  static RunManifest from_line(const std::string& line);
  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

std::string sha256_file(const std::filesystem::path& p);
std::string utc_now();

/// Appends one line to dir/manifest.jsonl.
void append_manifest(const std::filesystem::path& dir, const RunManifest& m);

/// All manifests of a JSON-lines file, in order.
std::vector<RunManifest> read_manifests(const std::filesystem::path& file);

}  // namespace walkrg::cli
