#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "envalign/repo_model.hpp"
#include "envalign/source_parser.hpp"

namespace envalign {

enum class ExtNodeKind { project, file, package };
enum class ExtEdgeKind { contains, imports };
enum class PackageOrigin { external, stdlib };

const char* to_string(ExtNodeKind kind);
const char* to_string(ExtEdgeKind kind);
const char* to_string(PackageOrigin origin);

struct ExtNode {
  std::string id;
  ExtNodeKind kind = ExtNodeKind::file;
  // package attributes
  bool used_in_code = false;
  bool declared = false;
  std::optional<std::string> declared_version_constraint;
  PackageOrigin origin = PackageOrigin::external;
};

struct ExtEdge {
  std::string src;
  std::string dst;
  ExtEdgeKind kind = ExtEdgeKind::contains;
};

struct DeclaredDependency {
  std::string package;  // normalized
  std::optional<std::string> version_constraint;
  std::string manifest;
  int line = 1;
};

enum class GapKind { used_not_declared, declared_not_used };

const char* to_string(GapKind kind);

struct DependencyGap {
  std::string package;
  GapKind kind = GapKind::used_not_declared;
  std::vector<std::string> using_files;
};

struct ExternalEnvGraph {
  std::vector<ExtNode> nodes;  // canonical order: by id, then kind
  std::vector<ExtEdge> edges;  // by (src, dst, kind)
  std::string snapshot_digest;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
  const ExtNode* find(const std::string& id) const;
};

// Declaration lines from a manifest file; malformed lines are skipped and
// reported through warnings.
std::vector<DeclaredDependency> parse_manifest(const RepoFile& file,
                                               std::vector<std::string>* warnings = nullptr);

struct ImportTargetClass {
  enum class Kind { internal, stdlib, external };
  Kind kind = Kind::external;
  std::string package;  // set for external
};

// Suffix-similarity threshold for internal-candidate classification.
inline constexpr double kSuffixMatchThreshold = 0.5;

// shared trailing dotted segments / segment count of `target`
double suffix_similarity(const std::string& target, const std::string& module);

ImportTargetClass resolve_import_target(const ImportRecord& imp,
                                        const std::set<std::string>& internal_modules,
                                        const std::set<std::string>& stdlib);

ExternalEnvGraph build_ext_graph(const RepoSnapshot& snapshot,
                                 const std::map<std::string, std::vector<ImportRecord>>& imports,
                                 const std::vector<DeclaredDependency>& declarations,
                                 const std::set<std::string>& stdlib,
                                 const std::map<std::string, std::string>& aliases = {});

std::vector<DependencyGap> find_dependency_gaps(const ExternalEnvGraph& graph);

}  // namespace envalign
