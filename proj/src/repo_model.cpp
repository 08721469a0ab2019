#include "envalign/repo_model.hpp"

#include <algorithm>

#include "envalign/util.hpp"

namespace envalign {

namespace fs = std::filesystem;

const char* to_string(FileRole role) {
  switch (role) {
    case FileRole::source: return "source";
    case FileRole::manifest: return "manifest";
    case FileRole::config: return "config";
    case FileRole::asset: return "asset";
  }
  return "asset";
}

const RepoFile* RepoSnapshot::find(const std::string& rel_path) const {
  auto it = std::lower_bound(files.begin(), files.end(), rel_path,
                             [](const RepoFile& f, const std::string& p) { return f.rel_path < p; });
  if (it != files.end() && it->rel_path == rel_path) return &*it;
  return nullptr;
}

FileRole classify_file(const std::string& rel_path, const ScanConfig& config) {
  fs::path p(rel_path);
  std::string name = p.filename().string();
  if (config.manifest_names.count(name)) return FileRole::manifest;
  std::string ext = p.extension().string();
  if (config.source_extensions.count(ext)) return FileRole::source;
  static const std::set<std::string> config_exts{".ini", ".cfg", ".toml", ".yaml", ".yml",
                                                 ".json"};
  if (config_exts.count(ext)) return FileRole::config;
  return FileRole::asset;
}

std::string file_digest(std::string_view content) { return to_hex(fnv1a(content)); }

RepoSnapshot scan_repository(const fs::path& root, const ScanConfig& config) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw RootNotFound(root.string());

  RepoSnapshot snap;
  snap.root = root;

  std::vector<std::string> rel_paths;
  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
  fs::recursive_directory_iterator end;
  for (; it != end; it.increment(ec)) {
    if (ec) break;
    const auto& entry = *it;
    std::string name = entry.path().filename().string();
    if (entry.is_directory(ec)) {
      bool hidden = !name.empty() && name[0] == '.' && !config.include_hidden;
      if (hidden || config.ignore_dirs.count(name)) it.disable_recursion_pending();
      continue;
    }
    if (entry.is_symlink(ec)) continue;  // do not follow
    if (!entry.is_regular_file(ec)) continue;
    std::string rel = fs::relative(entry.path(), root, ec).generic_string();
    if (ec || rel.empty() || rel.find("..") == 0) continue;
    rel_paths.push_back(std::move(rel));
  }
  std::sort(rel_paths.begin(), rel_paths.end());
  rel_paths.erase(std::unique(rel_paths.begin(), rel_paths.end()), rel_paths.end());

  std::uint64_t digest = fnv1a("");
  for (const auto& rel : rel_paths) {
    RepoFile file;
    file.rel_path = rel;
    file.role = classify_file(rel, config);
    auto bytes = read_file(root / fs::path(rel));
    std::string_view content;
    if (bytes) {
      file.bytes_len = bytes->size();
      content = *bytes;
      if (is_valid_utf8(*bytes)) {
        file.text = std::move(*bytes);
      } else {
        file.role = file.role == FileRole::source ? file.role : FileRole::asset;
      }
    } else {
      file.role = FileRole::asset;  // unreadable: retained, text absent
    }
    digest = fnv1a(rel, digest);
    digest = fnv1a(std::string_view("\0", 1), digest);
    digest = fnv1a(file.text ? std::string_view(*file.text) : content, digest);
    digest = fnv1a(std::string_view("\0", 1), digest);
    snap.files.push_back(std::move(file));
  }
  snap.digest = to_hex(digest);
  return snap;
}

}  // namespace envalign
