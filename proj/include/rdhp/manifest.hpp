#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace rdhp {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
/// 16 lowercase hex digits of fnv1a64.
std::string fnv1a_hex(std::string_view bytes);
/// Hash of a file's bytes; throws IoError when it cannot be read.
std::string hash_file(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

/// One recorded CLI invocation. Paths in argv, inputs and outputs are as the
/// user typed them; cwd is the working directory of the invocation relative to
/// the manifest's own directory, so a manifest can be replayed elsewhere.
struct ManifestEntry {
  std::string command;
  std::string cwd = ".";
  std::vector<std::string> argv;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::map<std::string, std::string> inputs;   // path -> hash
  std::map<std::string, std::string> outputs;  // path -> hash
  bool deterministic = true;

  nlohmann::json to_json() const;
  static ManifestEntry from_json(const nlohmann::json& j);
};

struct ExperimentManifest {
  std::string tool_version;
  std::vector<ManifestEntry> entries;

  nlohmann::json to_json() const;
  static ExperimentManifest from_json(const nlohmann::json& j);

  /// Missing file -> empty manifest.
  static ExperimentManifest load_or_empty(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  /// Files consumed by some entry before any entry produced them, as paths
  /// relative to the manifest directory.
  std::vector<std::string> external_inputs() const;
};

struct HashMismatch {
  std::size_t entry = 0;
  std::string path;
  std::string expected;
  std::string actual;  // empty when the file is missing
};

/// Re-hashes every recorded output of a deterministic entry, resolving paths
/// against base / entry.cwd (base is normally the manifest's directory).
std::vector<HashMismatch> check_outputs(const ExperimentManifest& manifest, const std::filesystem::path& base);

}  // namespace rdhp
