#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"

#include "bpo/cli/checkpoint.hpp"

namespace bpo::cli {

inline constexpr int kManifestVersion = 1;

/// SHA-1 of "blob <size>\0<content>", the hash git assigns to a file.
inline std::string git_blob_sha1(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("EVP_MD_CTX_new failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-1 computation failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

/// Hash of the running executable, or "unknown" where /proc is unavailable.
inline std::string executable_hash() {
  std::error_code ec;
  const auto exe = std::filesystem::read_symlink("/proc/self/exe", ec);
  if (ec) return "unknown";
  try {
    return git_blob_sha1(read_file(exe));
  } catch (const std::exception&) {
    return "unknown";
  }
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Run record: the full resolved config (enough to rerun with
/// `bpo <command> --config manifest.json`), seeds, binary hash, timing and
/// produced files.
struct Manifest {
  std::string command;
  std::vector<std::string> argv;
  TrainConfig config;
  std::vector<std::uint64_t> seeds;
  double wallclock = 0.0;
  nlohmann::json results = nlohmann::json::object();
  std::vector<std::string> outputs;

  nlohmann::json to_json() const {
    return {{"format", "bpo-manifest"},
            {"version", kManifestVersion},
            {"command", command},
            {"argv", argv},
            {"config", config_json(config)},
            {"seeds", seeds},
            {"n_seeds", config.n_seeds},
            {"eval_episodes", config.eval_episodes},
            {"binary_sha1", executable_hash()},
            {"started_utc", started},
            {"wallclock_seconds", wallclock},
            {"results", results},
            {"outputs", outputs}};
  }

  std::string started = utc_timestamp();
};

inline void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write manifest '" + path.string() + "'");
  os << m.to_json().dump(2) << '\n';
}

/// Loads a config from an INI file, or from the `config` object of a manifest
/// or checkpoint when the path ends in .json. Overrides apply last.
inline TrainConfig load_any_config(const std::string& path, const std::vector<std::string>& overrides) {
  if (std::filesystem::path(path).extension() != ".json") return load_config(path, overrides);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  if (!j.contains("config")) throw ConfigError("'" + path + "' has no config object");
  KeyValues entries;
  for (const auto& [k, v] : j.at("config").items()) {
    if (!v.is_string()) throw ConfigError("config key '" + k + "': expected a string value");
    entries.emplace_back(k, v.get<std::string>());
  }
  for (auto& kv : parse_overrides(overrides)) entries.push_back(std::move(kv));
  return build_config(entries);
}

}  // namespace bpo::cli
