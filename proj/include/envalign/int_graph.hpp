#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "envalign/ext_graph.hpp"
#include "envalign/repo_model.hpp"
#include "envalign/source_parser.hpp"

namespace envalign {

enum class IntNodeKind { file, module, symbol, unresolved_ref, parse_error };
enum class IntEdgeKind {
  defines_module,    // file -> module
  imports_module,    // module -> module
  defines_symbol,    // module -> symbol
  references_symbol, // module -> symbol
  imports_unresolved,// module -> unresolved-ref
  has_parse_error    // file -> parse-error
};

const char* to_string(IntNodeKind kind);
const char* to_string(IntEdgeKind kind);

struct ImporterSite {
  std::string module;
  std::string file;
  int line = 1;
};

struct IntNode {
  std::string id;
  IntNodeKind kind = IntNodeKind::file;
  std::string name;    // module name, symbol name, unresolved target, or file path
  std::string module;  // owning module for symbols
  SymbolKind symbol_kind = SymbolKind::top_level_binding;
  int line = 0;
  std::string message;                 // parse-error text
  std::vector<std::string> warnings;   // e.g. module name collisions
  std::vector<ImporterSite> importers; // unresolved-ref import sites
  std::optional<std::pair<std::string, double>> best_match;
};

struct IntEdge {
  std::string src;
  std::string dst;
  IntEdgeKind kind = IntEdgeKind::defines_module;
};

struct UnresolvedRef {
  std::string target;
  std::vector<std::string> importing_modules;
  std::optional<std::pair<std::string, double>> best_match;
};

struct RepoDependencyGraph {
  std::vector<IntNode> nodes;
  std::vector<IntEdge> edges;
  std::string snapshot_digest;

  nlohmann::json to_json() const;
  const IntNode* find(const std::string& id) const;
  std::set<std::string> defined_modules() const;
};

using ImportClassifier = std::function<ImportTargetClass(const ImportRecord&)>;

RepoDependencyGraph build_int_graph(const RepoSnapshot& snapshot,
                                    const std::map<std::string, FileExtraction>& extractions,
                                    const ImportClassifier& classify);

std::vector<UnresolvedRef> find_unresolved_refs(const RepoDependencyGraph& graph);

std::optional<std::pair<std::string, double>> suggest_module_match(
    const std::string& target, const std::set<std::string>& defined);

enum class SymbolResolution { resolved, missing_symbol, missing_module };

SymbolResolution resolve_symbol_reference(const std::string& module, const std::string& symbol,
                                          const RepoDependencyGraph& graph);

}  // namespace envalign
