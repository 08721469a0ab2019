#include "envalign/ext_graph.hpp"

#include <algorithm>
#include <cctype>

#include "envalign/util.hpp"

namespace envalign {

const char* to_string(ExtNodeKind kind) {
  switch (kind) {
    case ExtNodeKind::project: return "project";
    case ExtNodeKind::file: return "file";
    case ExtNodeKind::package: return "package";
  }
  return "file";
}

const char* to_string(ExtEdgeKind kind) {
  switch (kind) {
    case ExtEdgeKind::contains: return "contains";
    case ExtEdgeKind::imports: return "imports";
  }
  return "contains";
}

const char* to_string(PackageOrigin origin) {
  return origin == PackageOrigin::stdlib ? "stdlib" : "external";
}

const char* to_string(GapKind kind) {
  return kind == GapKind::used_not_declared ? "used-not-declared" : "declared-not-used";
}

const ExtNode* ExternalEnvGraph::find(const std::string& id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

nlohmann::json ExternalEnvGraph::to_json() const {
  nlohmann::json j;
  j["snapshot_digest"] = snapshot_digest;
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : nodes) {
    nlohmann::json attrs = nlohmann::json::object();
    if (n.kind == ExtNodeKind::package) {
      attrs["used_in_code"] = n.used_in_code;
      attrs["declared"] = n.declared;
      attrs["origin"] = to_string(n.origin);
      if (n.declared_version_constraint) {
        attrs["declared_version_constraint"] = *n.declared_version_constraint;
      }
    }
    j["nodes"].push_back({{"id", n.id}, {"kind", to_string(n.kind)}, {"attrs", attrs}});
  }
  j["edges"] = nlohmann::json::array();
  for (const auto& e : edges) {
    j["edges"].push_back({{"src", e.src}, {"dst", e.dst}, {"kind", to_string(e.kind)}});
  }
  if (!warnings.empty()) j["warnings"] = warnings;
  return j;
}

namespace {

// One requirement-style line: "Flask>=2.0 # web" -> {flask, ">=2.0"}.
std::optional<DeclaredDependency> parse_requirement_line(const std::string& raw,
                                                         const std::string& manifest, int line,
                                                         std::vector<std::string>* warnings) {
  std::string text = raw;
  // strip comment
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '#' && (i == 0 || std::isspace(static_cast<unsigned char>(text[i - 1])))) {
      text.resize(i);
      break;
    }
  }
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text[0] == '-') return std::nullopt;  // installer option, not a declaration
  size_t i = 0;
  while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_' ||
                             text[i] == '-' || text[i] == '.')) {
    ++i;
  }
  std::string name = text.substr(0, i);
  if (name.empty() || !std::isalnum(static_cast<unsigned char>(name[0]))) {
    if (warnings) {
      warnings->push_back("malformed manifest line " + manifest + ":" + std::to_string(line));
    }
    return std::nullopt;
  }
  // optional extras
  if (i < text.size() && text[i] == '[') {
    size_t close = text.find(']', i);
    if (close == std::string::npos) {
      if (warnings) {
        warnings->push_back("malformed manifest line " + manifest + ":" + std::to_string(line));
      }
      return std::nullopt;
    }
    i = close + 1;
  }
  std::string rest = trim(text.substr(i));
  size_t marker = rest.find(';');
  if (marker != std::string::npos) rest = trim(rest.substr(0, marker));
  DeclaredDependency dep;
  dep.package = normalize_package_name(name);
  if (!rest.empty()) dep.version_constraint = rest;
  dep.manifest = manifest;
  dep.line = line;
  return dep;
}

// Quoted strings inside the bracketed list that follows `key`, with line numbers.
std::vector<std::pair<std::string, int>> quoted_list_after_key(const std::string& text,
                                                               const std::string& key) {
  std::vector<std::pair<std::string, int>> out;
  size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    size_t open = text.find('[', pos + key.size());
    if (open == std::string::npos) break;
    // only accept '[' reasonably close to the key (same statement)
    std::string between = text.substr(pos + key.size(), open - pos - key.size());
    if (between.find_first_not_of(" =\t\r\n(") != std::string::npos) {
      pos += key.size();
      continue;
    }
    int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + open, '\n'));
    size_t i = open + 1;
    int depth = 1;
    while (i < text.size() && depth > 0) {
      char c = text[i];
      if (c == '\n') ++line;
      if (c == '[') ++depth;
      if (c == ']') --depth;
      if (c == '"' || c == '\'') {
        size_t close = text.find(c, i + 1);
        if (close == std::string::npos) break;
        out.emplace_back(text.substr(i + 1, close - i - 1), line);
        line += static_cast<int>(std::count(text.begin() + i, text.begin() + close, '\n'));
        i = close + 1;
        continue;
      }
      ++i;
    }
    pos = i;
  }
  return out;
}

}  // namespace

std::vector<DeclaredDependency> parse_manifest(const RepoFile& file,
                                               std::vector<std::string>* warnings) {
  std::vector<DeclaredDependency> deps;
  if (!file.text) return deps;
  const std::string& text = *file.text;
  std::string name = std::filesystem::path(file.rel_path).filename().string();

  if (name == "pyproject.toml" || name == "setup.py") {
    const char* key = name == "setup.py" ? "install_requires" : "dependencies";
    for (const auto& [req, line] : quoted_list_after_key(text, key)) {
      if (auto dep = parse_requirement_line(req, file.rel_path, line, warnings)) {
        deps.push_back(std::move(*dep));
      }
    }
    return deps;
  }
  if (name == "setup.cfg") {
    auto lines = split(text, '\n');
    bool in_block = false;
    for (size_t i = 0; i < lines.size(); ++i) {
      std::string t = trim(lines[i]);
      if (t.rfind("install_requires", 0) == 0) {
        in_block = true;
        size_t eq = t.find('=');
        if (eq != std::string::npos) {
          std::string tail = trim(t.substr(eq + 1));
          if (!tail.empty()) {
            if (auto dep = parse_requirement_line(tail, file.rel_path, static_cast<int>(i) + 1,
                                                  warnings)) {
              deps.push_back(std::move(*dep));
            }
          }
        }
        continue;
      }
      if (in_block) {
        bool indented = !lines[i].empty() && std::isspace(static_cast<unsigned char>(lines[i][0]));
        if (!indented) {
          in_block = false;
          continue;
        }
        if (t.empty()) continue;
        if (auto dep =
                parse_requirement_line(t, file.rel_path, static_cast<int>(i) + 1, warnings)) {
          deps.push_back(std::move(*dep));
        }
      }
    }
    return deps;
  }

  // requirement-list manifest (requirements.txt and friends)
  auto lines = split(text, '\n');
  for (size_t i = 0; i < lines.size(); ++i) {
    if (auto dep = parse_requirement_line(lines[i], file.rel_path, static_cast<int>(i) + 1,
                                          warnings)) {
      deps.push_back(std::move(*dep));
    }
  }
  return deps;
}

double suffix_similarity(const std::string& target, const std::string& module) {
  auto t = split(target, '.');
  auto m = split(module, '.');
  size_t shared = 0;
  while (shared < t.size() && shared < m.size() &&
         t[t.size() - 1 - shared] == m[m.size() - 1 - shared]) {
    ++shared;
  }
  if (t.empty()) return 0.0;
  return static_cast<double>(shared) / static_cast<double>(t.size());
}

ImportTargetClass resolve_import_target(const ImportRecord& imp,
                                        const std::set<std::string>& internal_modules,
                                        const std::set<std::string>& stdlib) {
  using Kind = ImportTargetClass::Kind;
  if (imp.relative_level > 0) return {Kind::internal, ""};
  if (imp.target.empty()) return {Kind::internal, ""};
  std::string first = split(imp.target, '.').front();
  for (const auto& mod : internal_modules) {
    if (split(mod, '.').front() == first) return {Kind::internal, ""};
  }
  if (stdlib.count(first)) return {Kind::stdlib, ""};
  for (const auto& mod : internal_modules) {
    if (suffix_similarity(imp.target, mod) >= kSuffixMatchThreshold) return {Kind::internal, ""};
  }
  return {Kind::external, first};
}

ExternalEnvGraph build_ext_graph(const RepoSnapshot& snapshot,
                                 const std::map<std::string, std::vector<ImportRecord>>& imports,
                                 const std::vector<DeclaredDependency>& declarations,
                                 const std::set<std::string>& stdlib,
                                 const std::map<std::string, std::string>& aliases) {
  ExternalEnvGraph graph;
  graph.snapshot_digest = snapshot.digest;

  std::set<std::string> internal_modules;
  for (const auto& file : snapshot.files) {
    if (file.role != FileRole::source) continue;
    try {
      std::string mod = derive_module_name(file.rel_path);
      if (!mod.empty()) internal_modules.insert(mod);
    } catch (const InvalidSourcePath&) {
    }
  }

  std::map<std::string, ExtNode> packages;  // id -> node
  std::vector<ExtEdge> edges;

  graph.nodes.push_back({"project", ExtNodeKind::project});
  for (const auto& file : snapshot.files) {
    graph.nodes.push_back({"file:" + file.rel_path, ExtNodeKind::file});
    edges.push_back({"project", "file:" + file.rel_path, ExtEdgeKind::contains});
  }

  auto distribution_name = [&](const std::string& import_name) {
    auto it = aliases.find(import_name);
    std::string name = it != aliases.end() ? it->second : import_name;
    return normalize_package_name(name);
  };

  for (const auto& [file, recs] : imports) {
    for (const auto& imp : recs) {
      auto cls = resolve_import_target(imp, internal_modules, stdlib);
      if (cls.kind == ImportTargetClass::Kind::internal) continue;
      std::string pkg_name;
      PackageOrigin origin;
      if (cls.kind == ImportTargetClass::Kind::stdlib) {
        pkg_name = split(imp.target, '.').front();
        origin = PackageOrigin::stdlib;
      } else {
        pkg_name = distribution_name(cls.package);
        origin = PackageOrigin::external;
      }
      std::string id = "pkg:" + pkg_name;
      auto& node = packages[id];
      if (node.id.empty()) {
        node.id = id;
        node.kind = ExtNodeKind::package;
        node.origin = origin;
      }
      node.used_in_code = true;
      edges.push_back({"file:" + file, id, ExtEdgeKind::imports});
    }
  }

  for (const auto& dep : declarations) {
    std::string id = "pkg:" + dep.package;
    auto& node = packages[id];
    if (node.id.empty()) {
      node.id = id;
      node.kind = ExtNodeKind::package;
      node.origin = stdlib.count(dep.package) ? PackageOrigin::stdlib : PackageOrigin::external;
    }
    node.declared = true;
    if (dep.version_constraint && !node.declared_version_constraint) {
      node.declared_version_constraint = dep.version_constraint;
    }
  }

  for (auto& [id, node] : packages) graph.nodes.push_back(std::move(node));
  graph.edges = std::move(edges);

  std::sort(graph.nodes.begin(), graph.nodes.end(), [](const ExtNode& a, const ExtNode& b) {
    if (a.id != b.id) return a.id < b.id;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  std::sort(graph.edges.begin(), graph.edges.end(), [](const ExtEdge& a, const ExtEdge& b) {
    if (a.src != b.src) return a.src < b.src;
    if (a.dst != b.dst) return a.dst < b.dst;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  graph.edges.erase(std::unique(graph.edges.begin(), graph.edges.end(),
                                [](const ExtEdge& a, const ExtEdge& b) {
                                  return a.src == b.src && a.dst == b.dst && a.kind == b.kind;
                                }),
                    graph.edges.end());
  return graph;
}

std::vector<DependencyGap> find_dependency_gaps(const ExternalEnvGraph& graph) {
  std::vector<DependencyGap> gaps;
  for (const auto& node : graph.nodes) {
    if (node.kind != ExtNodeKind::package) continue;
    if (node.origin == PackageOrigin::stdlib) continue;
    if (node.used_in_code && !node.declared) {
      DependencyGap gap{node.id.substr(4), GapKind::used_not_declared, {}};
      for (const auto& e : graph.edges) {
        if (e.kind == ExtEdgeKind::imports && e.dst == node.id) {
          gap.using_files.push_back(e.src.substr(5));
        }
      }
      gaps.push_back(std::move(gap));
    } else if (node.declared && !node.used_in_code) {
      gaps.push_back({node.id.substr(4), GapKind::declared_not_used, {}});
    }
  }
  std::sort(gaps.begin(), gaps.end(),
            [](const DependencyGap& a, const DependencyGap& b) { return a.package < b.package; });
  return gaps;
}

}  // namespace envalign
