#include "rdhp/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "rdhp/errors.hpp"

namespace rdhp {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string hash_file(const std::filesystem::path& path) { return fnv1a_hex(read_text(path)); }

nlohmann::json ManifestEntry::to_json() const {
  return {{"command", command}, {"cwd", cwd}, {"argv", argv},       {"seed", seed},
          {"config_hash", config_hash}, {"inputs", inputs}, {"outputs", outputs},
          {"deterministic", deterministic}};
}

ManifestEntry ManifestEntry::from_json(const nlohmann::json& j) {
  ManifestEntry e;
  e.command = j.at("command").get<std::string>();
  e.cwd = j.value("cwd", std::string("."));
  e.argv = j.at("argv").get<std::vector<std::string>>();
  e.seed = j.value("seed", std::uint64_t{0});
  e.config_hash = j.value("config_hash", std::string{});
  e.inputs = j.value("inputs", std::map<std::string, std::string>{});
  e.outputs = j.value("outputs", std::map<std::string, std::string>{});
  e.deterministic = j.value("deterministic", true);
  return e;
}

nlohmann::json ExperimentManifest::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries) arr.push_back(e.to_json());
  return {{"version", 1}, {"tool_version", tool_version}, {"entries", arr}};
}

ExperimentManifest ExperimentManifest::from_json(const nlohmann::json& j) {
  if (j.value("version", 0) != 1) throw SchemaError("unsupported manifest version");
  ExperimentManifest m;
  m.tool_version = j.value("tool_version", std::string{});
  for (const auto& e : j.at("entries")) m.entries.push_back(ManifestEntry::from_json(e));
  return m;
}

ExperimentManifest ExperimentManifest::load_or_empty(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  try {
    return from_json(nlohmann::json::parse(read_text(path)));
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInputError(1, path.string() + ": " + e.what());
  }
}

void ExperimentManifest::save(const std::filesystem::path& path) const { write_text(path, to_json().dump(2) + "\n"); }

std::vector<std::string> ExperimentManifest::external_inputs() const {
  std::set<std::string> produced, seen;
  std::vector<std::string> out;
  for (const auto& e : entries) {
    for (const auto& [path, hash] : e.inputs) {
      const std::string key = (std::filesystem::path(e.cwd) / path).lexically_normal().string();
      if (!produced.count(key) && seen.insert(key).second) out.push_back(key);
    }
    for (const auto& [path, hash] : e.outputs)
      produced.insert((std::filesystem::path(e.cwd) / path).lexically_normal().string());
  }
  return out;
}

std::vector<HashMismatch> check_outputs(const ExperimentManifest& manifest, const std::filesystem::path& base) {
  std::vector<HashMismatch> bad;
  // Later entries may legitimately overwrite a file; only its final hash counts.
  std::map<std::string, std::pair<std::size_t, std::string>> last;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    for (const auto& [path, hash] : e.outputs) {
      const std::string key = (std::filesystem::path(e.cwd) / path).lexically_normal().string();
      if (e.deterministic)
        last[key] = {i, hash};
      else
        last.erase(key);
    }
  }
  for (const auto& [path, rec] : last) {
    const auto full = base / path;
    std::string actual;
    if (std::filesystem::exists(full)) actual = hash_file(full);
    if (actual != rec.second) bad.push_back({rec.first, path, rec.second, actual});
  }
  return bad;
}

}  // namespace rdhp
