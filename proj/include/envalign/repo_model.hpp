#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace envalign {

enum class FileRole { source, manifest, config, asset };

const char* to_string(FileRole role);

struct ScanConfig {
  std::set<std::string> source_extensions{".py"};
  std::set<std::string> manifest_names{"requirements.txt", "pyproject.toml", "setup.py",
                                       "setup.cfg"};
  std::set<std::string> ignore_dirs{".git", "__pycache__", ".venv", "venv", "node_modules"};
  bool include_hidden = false;
};

struct RepoFile {
  std::string rel_path;
  FileRole role = FileRole::asset;
  std::uint64_t bytes_len = 0;
  std::optional<std::string> text;  // absent when undecodable or unreadable
};

struct RepoSnapshot {
  std::filesystem::path root;
  std::vector<RepoFile> files;  // sorted by rel_path, unique
  std::string digest;

  const RepoFile* find(const std::string& rel_path) const;
};

struct RootNotFound : std::runtime_error {
  explicit RootNotFound(const std::string& root)
      : std::runtime_error("repository root not found: " + root) {}
};

FileRole classify_file(const std::string& rel_path, const ScanConfig& config);

// Deterministic snapshot of everything under root, minus ignored and hidden
// directories. Unreadable or binary files are kept with text absent.
RepoSnapshot scan_repository(const std::filesystem::path& root, const ScanConfig& config);

// Digest of a single file's content, used for stale-edit detection.
std::string file_digest(std::string_view content);

}  // namespace envalign
