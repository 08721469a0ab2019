#include "envalign/int_graph.hpp"

#include <algorithm>

#include "envalign/util.hpp"

namespace envalign {

const char* to_string(IntNodeKind kind) {
  switch (kind) {
    case IntNodeKind::file: return "file";
    case IntNodeKind::module: return "module";
    case IntNodeKind::symbol: return "symbol";
    case IntNodeKind::unresolved_ref: return "unresolved-ref";
    case IntNodeKind::parse_error: return "parse-error";
  }
  return "file";
}

const char* to_string(IntEdgeKind kind) {
  switch (kind) {
    case IntEdgeKind::defines_module: return "defines-module";
    case IntEdgeKind::imports_module: return "imports-module";
    case IntEdgeKind::defines_symbol: return "defines-symbol";
    case IntEdgeKind::references_symbol: return "references-symbol";
    case IntEdgeKind::imports_unresolved: return "imports-unresolved";
    case IntEdgeKind::has_parse_error: return "has-parse-error";
  }
  return "defines-module";
}

const IntNode* RepoDependencyGraph::find(const std::string& id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

std::set<std::string> RepoDependencyGraph::defined_modules() const {
  std::set<std::string> out;
  for (const auto& n : nodes) {
    if (n.kind == IntNodeKind::module) out.insert(n.name);
  }
  return out;
}

nlohmann::json RepoDependencyGraph::to_json() const {
  nlohmann::json j;
  j["snapshot_digest"] = snapshot_digest;
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : nodes) {
    nlohmann::json attrs = nlohmann::json::object();
    switch (n.kind) {
      case IntNodeKind::module:
        attrs["name"] = n.name;
        break;
      case IntNodeKind::symbol:
        attrs["name"] = n.name;
        attrs["module"] = n.module;
        attrs["symbol_kind"] = to_string(n.symbol_kind);
        attrs["line"] = n.line;
        break;
      case IntNodeKind::unresolved_ref: {
        attrs["target"] = n.name;
        nlohmann::json importers = nlohmann::json::array();
        for (const auto& site : n.importers) {
          importers.push_back(
              {{"module", site.module}, {"file", site.file}, {"line", site.line}});
        }
        attrs["importers"] = importers;
        if (n.best_match) {
          attrs["best_match"] = {{"module", n.best_match->first},
                                 {"score", n.best_match->second}};
        }
        break;
      }
      case IntNodeKind::parse_error:
        attrs["file"] = n.name;
        attrs["line"] = n.line;
        attrs["message"] = n.message;
        break;
      case IntNodeKind::file:
        break;
    }
    if (!n.warnings.empty()) attrs["warnings"] = n.warnings;
    j["nodes"].push_back({{"id", n.id}, {"kind", to_string(n.kind)}, {"attrs", attrs}});
  }
  j["edges"] = nlohmann::json::array();
  for (const auto& e : edges) {
    j["edges"].push_back({{"src", e.src}, {"dst", e.dst}, {"kind", to_string(e.kind)}});
  }
  return j;
}

std::optional<std::pair<std::string, double>> suggest_module_match(
    const std::string& target, const std::set<std::string>& defined) {
  std::optional<std::pair<std::string, double>> best;
  for (const auto& mod : defined) {
    double score = suffix_similarity(target, mod);
    if (score < kSuffixMatchThreshold) continue;
    if (!best || score > best->second || (score == best->second && mod < best->first)) {
      best = {mod, score};
    }
  }
  return best;
}

SymbolResolution resolve_symbol_reference(const std::string& module, const std::string& symbol,
                                          const RepoDependencyGraph& graph) {
  if (!graph.find("mod:" + module)) return SymbolResolution::missing_module;
  if (!graph.find("sym:" + module + "." + symbol)) return SymbolResolution::missing_symbol;
  return SymbolResolution::resolved;
}

namespace {

bool is_init_file(const std::string& rel_path) {
  return std::filesystem::path(rel_path).filename() == "__init__.py";
}

// Resolve a (possibly relative) import target to an absolute dotted name.
// Returns the literal target when the relative walk escapes the repo root.
std::string absolute_target(const ImportRecord& imp, const std::string& importer_module,
                            bool importer_is_init) {
  if (imp.relative_level == 0) return imp.target;
  auto base = split(importer_module, '.');
  if (!importer_is_init && !base.empty()) base.pop_back();
  for (int i = 1; i < imp.relative_level; ++i) {
    if (base.empty()) {
      std::string dots(imp.relative_level, '.');
      return dots + imp.target;
    }
    base.pop_back();
  }
  std::string abs = join(base, ".");
  if (!imp.target.empty()) {
    if (!abs.empty()) abs += ".";
    abs += imp.target;
  }
  return abs;
}

}  // namespace

RepoDependencyGraph build_int_graph(const RepoSnapshot& snapshot,
                                    const std::map<std::string, FileExtraction>& extractions,
                                    const ImportClassifier& classify) {
  RepoDependencyGraph graph;
  graph.snapshot_digest = snapshot.digest;

  std::vector<IntNode> nodes;
  std::vector<IntEdge> edges;

  std::map<std::string, std::string> module_by_file;  // rel_path -> module name
  std::map<std::string, std::string> file_by_module;
  std::map<std::string, IntNode> module_nodes;

  for (const auto& file : snapshot.files) {
    if (file.role != FileRole::source) continue;
    nodes.push_back({"file:" + file.rel_path, IntNodeKind::file, file.rel_path});

    auto it = extractions.find(file.rel_path);
    if (it == extractions.end()) continue;
    const auto& ex = it->second;
    if (ex.failure) {
      IntNode perr{"perr:" + file.rel_path, IntNodeKind::parse_error, file.rel_path};
      perr.line = ex.failure->line;
      perr.message = ex.failure->message;
      nodes.push_back(std::move(perr));
      edges.push_back({"file:" + file.rel_path, "perr:" + file.rel_path,
                       IntEdgeKind::has_parse_error});
      continue;  // a broken file defines no module
    }
    std::string mod;
    try {
      mod = derive_module_name(file.rel_path);
    } catch (const InvalidSourcePath&) {
      continue;
    }
    if (mod.empty()) continue;
    auto existing = file_by_module.find(mod);
    if (existing != file_by_module.end()) {
      module_nodes[mod].warnings.push_back("module name collision: " + file.rel_path + " and " +
                                           existing->second);
      continue;
    }
    file_by_module[mod] = file.rel_path;
    module_by_file[file.rel_path] = mod;
    IntNode node{"mod:" + mod, IntNodeKind::module, mod};
    module_nodes[mod] = std::move(node);
    edges.push_back({"file:" + file.rel_path, "mod:" + mod, IntEdgeKind::defines_module});
  }

  std::set<std::string> defined;
  for (const auto& [mod, _] : module_nodes) defined.insert(mod);

  // symbols
  std::map<std::string, IntNode> symbol_nodes;
  for (const auto& [file, mod] : module_by_file) {
    const auto& ex = extractions.at(file);
    for (const auto& sym : ex.symbols) {
      std::string id = "sym:" + mod + "." + sym.name;
      IntNode node{id, IntNodeKind::symbol, sym.name};
      node.module = mod;
      node.symbol_kind = sym.kind;
      node.line = sym.line;
      symbol_nodes[id] = std::move(node);  // duplicates collapse, last wins
      edges.push_back({"mod:" + mod, id, IntEdgeKind::defines_symbol});
    }
  }

  // imports
  std::map<std::string, IntNode> unresolved_nodes;
  for (const auto& [file, mod] : module_by_file) {
    const auto& ex = extractions.at(file);
    bool init = is_init_file(file);
    for (const auto& imp : ex.imports) {
      auto cls = classify(imp);
      if (cls.kind != ImportTargetClass::Kind::internal) continue;  // lives in G_ext
      std::string target = absolute_target(imp, mod, init);
      if (target.empty()) continue;  // "from . import x" inside the top-level package
      if (defined.count(target)) {
        edges.push_back({"mod:" + mod, "mod:" + target, IntEdgeKind::imports_module});
        for (const auto& name : imp.imported_symbols) {
          std::string sym_id = "sym:" + target + "." + name;
          if (symbol_nodes.count(sym_id)) {
            edges.push_back({"mod:" + mod, sym_id, IntEdgeKind::references_symbol});
          } else if (defined.count(target + "." + name)) {
            // from-import of a submodule
            edges.push_back({"mod:" + mod, "mod:" + target + "." + name,
                             IntEdgeKind::imports_module});
          }
        }
        continue;
      }
      std::string id = "unres:" + target;
      auto& node = unresolved_nodes[id];
      if (node.id.empty()) {
        node.id = id;
        node.kind = IntNodeKind::unresolved_ref;
        node.name = target;
        node.best_match = suggest_module_match(target, defined);
      }
      node.importers.push_back({mod, file, imp.line});
      edges.push_back({"mod:" + mod, id, IntEdgeKind::imports_unresolved});
    }
  }

  for (auto& [_, node] : module_nodes) nodes.push_back(std::move(node));
  for (auto& [_, node] : symbol_nodes) nodes.push_back(std::move(node));
  for (auto& [_, node] : unresolved_nodes) {
    std::sort(node.importers.begin(), node.importers.end(),
              [](const ImporterSite& a, const ImporterSite& b) {
                if (a.module != b.module) return a.module < b.module;
                return a.line < b.line;
              });
    nodes.push_back(std::move(node));
  }

  std::sort(nodes.begin(), nodes.end(), [](const IntNode& a, const IntNode& b) {
    if (a.id != b.id) return a.id < b.id;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  std::sort(edges.begin(), edges.end(), [](const IntEdge& a, const IntEdge& b) {
    if (a.src != b.src) return a.src < b.src;
    if (a.dst != b.dst) return a.dst < b.dst;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const IntEdge& a, const IntEdge& b) {
                            return a.src == b.src && a.dst == b.dst && a.kind == b.kind;
                          }),
              edges.end());
  graph.nodes = std::move(nodes);
  graph.edges = std::move(edges);
  return graph;
}

std::vector<UnresolvedRef> find_unresolved_refs(const RepoDependencyGraph& graph) {
  std::vector<UnresolvedRef> refs;
  for (const auto& node : graph.nodes) {
    if (node.kind != IntNodeKind::unresolved_ref) continue;
    UnresolvedRef ref;
    ref.target = node.name;
    for (const auto& site : node.importers) {
      if (ref.importing_modules.empty() || ref.importing_modules.back() != site.module) {
        ref.importing_modules.push_back(site.module);
      }
    }
    ref.best_match = node.best_match;
    refs.push_back(std::move(ref));
  }
  std::sort(refs.begin(), refs.end(),
            [](const UnresolvedRef& a, const UnresolvedRef& b) { return a.target < b.target; });
  return refs;
}

}  // namespace envalign
