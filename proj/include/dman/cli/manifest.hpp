#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace dman::cli {

struct InputRecord {
  std::string path;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string command;
  std::vector<std::string> args;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::vector<InputRecord> inputs;
  std::vector<std::string> outputs;  // relative to the run directory
  std::string version;
  std::string started_at;
  std::string finished_at;
  int exit_code = 0;

  void add_input(const std::filesystem::path& p);
  nlohmann::json to_json() const;
};

// Lowercase hex SHA-256 of a file's bytes. Throws IoError.
std::string sha256_file(const std::filesystem::path& p);

// Build version, e.g. "0.1.0+g1051ec5".
std::string artifact_version();

// UTC, "2026-10-15T09:30:00Z".
std::string utc_timestamp();

// Relative paths that do not exist under the working directory are looked up
// under $DMAN_DATA_DIR.
std::filesystem::path resolve_input(const std::string& path);

// Parent of the per-run directories: the given value, else
// $DMAN_DATA_DIR/runs, else ./runs.
std::filesystem::path runs_root(const std::string& explicit_root);

// Creates <root>/<YYYYmmdd-HHMMSS>-seed<N>, adding -2, -3, ... on collision.
std::filesystem::path make_run_dir(const std::filesystem::path& root, std::uint64_t seed);

}  // namespace dman::cli
