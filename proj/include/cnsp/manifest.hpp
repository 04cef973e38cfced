#pragma once

#include <string>
#include <utility>
#include <vector>

namespace cnsp {

// hex SHA-256 of a file's bytes
std::string sha256_file(const std::string& path);

struct RunManifest {
  std::vector<std::pair<std::string, std::string>> config;
  std::string version;
  int threads = 1;
  std::vector<std::pair<std::string, std::string>> fitted;
  double wall_seconds = 0.0;
  std::string status;  // pass, fail, abort, config_error, error
  std::string message;
  std::vector<std::string> files;  // names relative to the output directory
};

// Writes `manifest.txt` (key = value lines) into dir.  Every listed file gets
// a `file.<name> = <sha256>` line; missing files are listed as "missing".
void write_manifest(const std::string& dir, const RunManifest& m);

} // namespace cnsp
