#include "envalign/source_parser.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "envalign/util.hpp"

namespace envalign {

const char* to_string(SymbolKind kind) {
  switch (kind) {
    case SymbolKind::function_def: return "function-def";
    case SymbolKind::class_def: return "class-def";
    case SymbolKind::top_level_binding: return "top-level-binding";
  }
  return "top-level-binding";
}

std::string derive_module_name(const std::string& rel_path) {
  std::string path = rel_path;
  std::replace(path.begin(), path.end(), '\\', '/');
  if (path.size() < 4 || path.substr(path.size() - 3) != ".py") throw InvalidSourcePath(rel_path);
  path.resize(path.size() - 3);
  auto segments = split(path, '/');
  if (!segments.empty() && segments.back() == "__init__") segments.pop_back();
  return join(segments, ".");
}

namespace {

struct Scrubber {
  // Strings are blanked and comments stripped so statement parsing only sees
  // structure. Tracks multi-line string state across physical lines.
  std::string triple_delim;  // non-empty while inside a triple-quoted string
  int triple_start_line = 0;
  bool in_single = false;  // single-quoted string continued via escaped newline
  char single_quote = 0;
  int single_start_line = 0;

  // Returns scrubbed line text, or a failure.
  std::optional<ParseFailure> scrub(const std::string& line, int lineno, const std::string& file,
                                    std::string& out) {
    out.clear();
    size_t i = 0;
    if (!triple_delim.empty()) {
      size_t pos = line.find(triple_delim, 0);
      if (pos == std::string::npos) return std::nullopt;  // still inside
      i = pos + 3;
      triple_delim.clear();
      out.append(i, ' ');
    } else if (in_single) {
      // consume until the closing quote
      bool closed = false;
      while (i < line.size()) {
        char c = line[i];
        if (c == '\\' && i + 1 < line.size()) {
          i += 2;
          continue;
        }
        if (c == single_quote) {
          ++i;
          closed = true;
          break;
        }
        ++i;
      }
      if (!closed) {
        if (!line.empty() && line.back() == '\\') return std::nullopt;
        return ParseFailure{file, single_start_line, "unterminated string literal"};
      }
      in_single = false;
      out.append(i, ' ');
    }
    while (i < line.size()) {
      char c = line[i];
      if (c == '#') break;  // comment to end of line
      if (c == '\'' || c == '"') {
        if (i + 2 < line.size() && line[i + 1] == c && line[i + 2] == c) {
          std::string delim(3, c);
          size_t close = line.find(delim, i + 3);
          if (close == std::string::npos) {
            triple_delim = delim;
            triple_start_line = lineno;
            out += "\"\"";
            return std::nullopt;
          }
          i = close + 3;
          out += "\"\"";
          continue;
        }
        // single-line string
        size_t j = i + 1;
        bool closed = false;
        while (j < line.size()) {
          if (line[j] == '\\' && j + 1 < line.size()) {
            j += 2;
            continue;
          }
          if (line[j] == c) {
            closed = true;
            ++j;
            break;
          }
          ++j;
        }
        if (!closed) {
          if (!line.empty() && line.back() == '\\') {
            in_single = true;
            single_quote = c;
            single_start_line = lineno;
            out += "\"\"";
            return std::nullopt;
          }
          return ParseFailure{file, lineno, "unterminated string literal"};
        }
        out += "\"\"";
        i = j;
        continue;
      }
      out += c;
      ++i;
    }
    return std::nullopt;
  }
};

int bracket_delta(const std::string& scrubbed) {
  int d = 0;
  for (char c : scrubbed) {
    if (c == '(' || c == '[' || c == '{') ++d;
    if (c == ')' || c == ']' || c == '}') --d;
  }
  return d;
}

// Tokenize a scrubbed statement into identifiers/dotted names, commas, stars
// and "as" keywords; parentheses are dropped.
std::vector<std::string> import_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '\\') {
      ++i;
      continue;
    }
    if (c == ',' || c == '*' || c == ';') {
      tokens.emplace_back(1, c);
      ++i;
      continue;
    }
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
      size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' ||
              text[j] == '.')) {
        ++j;
      }
      tokens.emplace_back(text.substr(i, j - i));
      i = j;
      continue;
    }
    tokens.emplace_back(1, c);  // unexpected char, surfaced to the parser
    ++i;
  }
  return tokens;
}

bool parse_plain_import(const std::string& tail, const std::string& file, int line, bool nested,
                        std::vector<ImportRecord>& out) {
  auto tokens = import_tokens(tail);
  size_t i = 0;
  while (i < tokens.size()) {
    if (!is_dotted_name(tokens[i])) return false;
    ImportRecord rec;
    rec.importer_file = file;
    rec.target = tokens[i];
    rec.line = line;
    rec.nested = nested;
    ++i;
    if (i + 1 < tokens.size() && tokens[i] == "as" && is_identifier(tokens[i + 1])) i += 2;
    out.push_back(std::move(rec));
    if (i < tokens.size()) {
      if (tokens[i] != ",") return false;
      ++i;
      if (i == tokens.size()) return false;  // trailing comma
    }
  }
  return !out.empty();
}

bool parse_from_import(const std::string& tail, const std::string& file, int line, bool nested,
                       std::vector<ImportRecord>& out) {
  auto tokens = import_tokens(tail);
  if (tokens.empty()) return false;
  ImportRecord rec;
  rec.importer_file = file;
  rec.line = line;
  rec.nested = nested;
  size_t i = 0;
  // leading dots may be fused with the module name ("..pkg.mod") or stand alone
  std::string head = tokens[i];
  size_t dots = 0;
  while (dots < head.size() && head[dots] == '.') ++dots;
  rec.relative_level = static_cast<int>(dots);
  std::string target = head.substr(dots);
  if (dots == head.size() && dots > 0) target.clear();
  if (!target.empty() && !is_dotted_name(target)) return false;
  rec.target = target;
  if (rec.relative_level == 0 && rec.target.empty()) return false;
  ++i;
  if (i >= tokens.size() || tokens[i] != "import") return false;
  ++i;
  if (i >= tokens.size()) return false;
  if (tokens[i] == "*") {
    out.push_back(std::move(rec));  // star import treated as whole-module
    return i + 1 == tokens.size();
  }
  while (i < tokens.size()) {
    if (!is_identifier(tokens[i])) return false;
    rec.imported_symbols.push_back(tokens[i]);
    ++i;
    if (i + 1 < tokens.size() && tokens[i] == "as" && is_identifier(tokens[i + 1])) i += 2;
    if (i < tokens.size()) {
      if (tokens[i] != ",") return false;
      ++i;
    }
  }
  out.push_back(std::move(rec));
  return true;
}

std::optional<SymbolDef> parse_definition(const std::string& stmt, const std::string& module,
                                          int line) {
  std::string s = trim(stmt);
  auto name_at = [&](size_t pos) -> std::string {
    size_t j = pos;
    while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
    return s.substr(pos, j - pos);
  };
  if (s.rfind("async def ", 0) == 0 || s.rfind("def ", 0) == 0) {
    size_t pos = s.rfind("async def ", 0) == 0 ? 10 : 4;
    while (pos < s.size() && s[pos] == ' ') ++pos;
    std::string name = name_at(pos);
    if (is_identifier(name)) return SymbolDef{module, name, SymbolKind::function_def, line};
    return std::nullopt;
  }
  if (s.rfind("class ", 0) == 0) {
    size_t pos = 6;
    while (pos < s.size() && s[pos] == ' ') ++pos;
    std::string name = name_at(pos);
    if (is_identifier(name)) return SymbolDef{module, name, SymbolKind::class_def, line};
    return std::nullopt;
  }
  // simple top-level binding: NAME = ... or NAME: T = ...
  std::string name = name_at(0);
  if (!is_identifier(name)) return std::nullopt;
  size_t pos = name.size();
  while (pos < s.size() && s[pos] == ' ') ++pos;
  if (pos < s.size() && s[pos] == ':') {
    size_t eq = s.find('=', pos);
    if (eq == std::string::npos || (eq + 1 < s.size() && s[eq + 1] == '=')) return std::nullopt;
    return SymbolDef{module, name, SymbolKind::top_level_binding, line};
  }
  if (pos < s.size() && s[pos] == '=' && (pos + 1 >= s.size() || s[pos + 1] != '=')) {
    static const std::set<std::string> keywords{"import", "from",   "return", "if",    "elif",
                                                "else",   "while",  "for",    "with",  "try",
                                                "except", "lambda", "pass",   "raise", "assert",
                                                "del",    "global", "yield",  "not"};
    if (keywords.count(name)) return std::nullopt;
    return SymbolDef{module, name, SymbolKind::top_level_binding, line};
  }
  return std::nullopt;
}

}  // namespace

FileExtraction extract_file(const std::string& text, const std::string& rel_path,
                            const std::string& module) {
  FileExtraction result;
  auto fail = [&](ParseFailure f) {
    result.imports.clear();
    result.symbols.clear();
    result.failure = std::move(f);
    return result;
  };

  auto lines = split(text, '\n');
  Scrubber scrubber;
  std::string logical;
  int logical_start = 0;
  int logical_indent = 0;
  int depth = 0;
  bool continuation = false;

  auto process_logical = [&](const std::string& stmt, int start_line,
                             int indent) -> std::optional<ParseFailure> {
    std::string s = trim(stmt);
    if (s.empty()) return std::nullopt;
    bool nested = indent > 0;
    if (s == "import" || s.rfind("import ", 0) == 0) {
      std::vector<ImportRecord> recs;
      if (!parse_plain_import(s.size() > 6 ? s.substr(7) : "", rel_path, start_line, nested,
                              recs)) {
        return ParseFailure{rel_path, start_line, "invalid import statement"};
      }
      for (auto& r : recs) result.imports.push_back(std::move(r));
      return std::nullopt;
    }
    if (s.rfind("from ", 0) == 0) {
      std::vector<ImportRecord> recs;
      if (!parse_from_import(s.substr(5), rel_path, start_line, nested, recs)) {
        return ParseFailure{rel_path, start_line, "invalid import statement"};
      }
      for (auto& r : recs) result.imports.push_back(std::move(r));
      return std::nullopt;
    }
    if (!nested) {
      if (auto def = parse_definition(s, module, start_line)) result.symbols.push_back(*def);
    }
    return std::nullopt;
  };

  std::string scrubbed;
  for (size_t idx = 0; idx < lines.size(); ++idx) {
    int lineno = static_cast<int>(idx) + 1;
    bool was_in_string = !scrubber.triple_delim.empty() || scrubber.in_single;
    auto err = scrubber.scrub(lines[idx], lineno, rel_path, scrubbed);
    if (err) return fail(*err);
    bool now_in_string = !scrubber.triple_delim.empty() || scrubber.in_single;

    if (!continuation) {
      logical = scrubbed;
      logical_start = lineno;
      logical_indent = 0;
      if (!was_in_string) {
        for (char c : lines[idx]) {
          if (c == ' ') ++logical_indent;
          else if (c == '\t') logical_indent += 8;
          else break;
        }
      } else {
        logical_indent = 1;  // statement began inside a string: never top-level
      }
      depth = 0;
    } else {
      logical += ' ';
      logical += scrubbed;
    }
    depth += bracket_delta(scrubbed);
    if (depth < 0) return fail({rel_path, lineno, "unmatched closing bracket"});

    std::string t = trim(scrubbed);
    bool backslash = !now_in_string && !lines[idx].empty() && lines[idx].back() == '\\';
    if (backslash && !logical.empty() && logical.back() == '\\') logical.pop_back();
    if (depth > 0 || backslash || now_in_string) {
      continuation = true;
      continue;
    }
    continuation = false;
    if (auto perr = process_logical(logical, logical_start, logical_indent)) return fail(*perr);
  }
  if (!scrubber.triple_delim.empty()) {
    return fail({rel_path, scrubber.triple_start_line, "unterminated triple-quoted string"});
  }
  if (scrubber.in_single) {
    return fail({rel_path, scrubber.single_start_line, "unterminated string literal"});
  }
  if (depth > 0) return fail({rel_path, logical_start, "unmatched opening bracket"});
  if (continuation) {
    if (auto perr = process_logical(logical, logical_start, logical_indent)) return fail(*perr);
  }

  // Later top-level bindings shadow earlier ones of the same name.
  std::vector<SymbolDef> deduped;
  for (size_t i = 0; i < result.symbols.size(); ++i) {
    const auto& sym = result.symbols[i];
    if (sym.kind == SymbolKind::top_level_binding) {
      bool shadowed = false;
      for (size_t j = i + 1; j < result.symbols.size(); ++j) {
        if (result.symbols[j].kind == SymbolKind::top_level_binding &&
            result.symbols[j].name == sym.name) {
          shadowed = true;
          break;
        }
      }
      if (shadowed) continue;
    }
    deduped.push_back(sym);
  }
  result.symbols = std::move(deduped);
  return result;
}

std::variant<std::vector<ImportRecord>, ParseFailure> extract_imports(const std::string& text,
                                                                      const std::string& rel_path) {
  auto ex = extract_file(text, rel_path, "");
  if (ex.failure) return *ex.failure;
  return ex.imports;
}

std::variant<std::vector<SymbolDef>, ParseFailure> extract_symbols(const std::string& text,
                                                                   const std::string& module) {
  auto ex = extract_file(text, "", module);
  if (ex.failure) {
    ex.failure->file = "";
    return *ex.failure;
  }
  return ex.symbols;
}

}  // namespace envalign
