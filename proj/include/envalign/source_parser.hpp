#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace envalign {

struct ImportRecord {
  std::string importer_file;
  std::string target;                         // dotted; may be empty for "from . import x"
  std::vector<std::string> imported_symbols;  // empty for whole-module import
  int relative_level = 0;                     // leading dots on a from-import
  int line = 1;
  bool nested = false;  // inside a function/class body
};

enum class SymbolKind { function_def, class_def, top_level_binding };

const char* to_string(SymbolKind kind);

struct SymbolDef {
  std::string module;
  std::string name;
  SymbolKind kind = SymbolKind::top_level_binding;
  int line = 1;
};

struct ParseFailure {
  std::string file;
  int line = 0;  // 0 = unknown
  std::string message;
};

// Combined single-pass extraction; imports and symbols are empty when failure
// is set.
struct FileExtraction {
  std::vector<ImportRecord> imports;
  std::vector<SymbolDef> symbols;
  std::optional<ParseFailure> failure;
};

FileExtraction extract_file(const std::string& text, const std::string& rel_path,
                            const std::string& module);

std::variant<std::vector<ImportRecord>, ParseFailure> extract_imports(const std::string& text,
                                                                      const std::string& rel_path);

std::variant<std::vector<SymbolDef>, ParseFailure> extract_symbols(const std::string& text,
                                                                   const std::string& module);

struct InvalidSourcePath : std::runtime_error {
  explicit InvalidSourcePath(const std::string& path)
      : std::runtime_error("not a source path: " + path) {}
};

// "src/client.py" -> "src.client"; "src/__init__.py" -> "src".
// A root-level initializer maps to "" (callers skip it).
std::string derive_module_name(const std::string& rel_path);

}  // namespace envalign
