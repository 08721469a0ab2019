#include "envalign/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <sstream>

#include "envalign/stdlib_names.hpp"
#include "envalign/util.hpp"

namespace envalign {

namespace fs = std::filesystem;

const char* to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::remove_declaration: return "remove-declaration";
    case FaultKind::rename_internal_module: return "rename-internal-module";
    case FaultKind::break_internal_import: return "break-internal-import";
    case FaultKind::delete_symbol: return "delete-symbol";
    case FaultKind::inject_syntax_error: return "inject-syntax-error";
    case FaultKind::inject_logic_fault: return "inject-logic-fault";
  }
  return "remove-declaration";
}

std::optional<FaultKind> fault_kind_from_string(const std::string& name) {
  static const FaultKind kAll[] = {
      FaultKind::remove_declaration,  FaultKind::rename_internal_module,
      FaultKind::break_internal_import, FaultKind::delete_symbol,
      FaultKind::inject_syntax_error, FaultKind::inject_logic_fault};
  for (FaultKind kind : kAll) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

AttributionSource ground_truth_for(FaultKind kind) {
  switch (kind) {
    case FaultKind::remove_declaration:
      return AttributionSource::external_dependency;
    case FaultKind::rename_internal_module:
    case FaultKind::break_internal_import:
    case FaultKind::delete_symbol:
    case FaultKind::inject_syntax_error:
      return AttributionSource::internal_reference;
    case FaultKind::inject_logic_fault:
      return AttributionSource::residual_logic;
  }
  return AttributionSource::residual_logic;
}

namespace {

std::optional<AttributionSource> source_from_string(const std::string& name) {
  static const AttributionSource kAll[] = {
      AttributionSource::external_dependency, AttributionSource::internal_reference,
      AttributionSource::residual_logic, AttributionSource::pass};
  for (AttributionSource source : kAll) {
    if (name == to_string(source)) return source;
  }
  return std::nullopt;
}

std::uint64_t sub_seed_for(std::uint64_t seed, int case_index, int attempt) {
  std::string key = std::to_string(seed) + "/" + std::to_string(case_index) + "/" +
                    std::to_string(attempt);
  return fnv1a(key);
}

std::size_t pick(std::mt19937_64& rng, std::size_t count) {
  return static_cast<std::size_t>(rng() % count);
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

std::string leading_requirement_name(const std::string& raw_line) {
  std::string line = raw_line.substr(0, raw_line.find('#'));
  line = trim(line);
  std::string name;
  for (char c : line) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.') {
      name += c;
    } else {
      break;
    }
  }
  return name;
}

std::string module_of(const std::string& rel_path) {
  try {
    return derive_module_name(rel_path);
  } catch (const InvalidSourcePath&) {
    return "";
  }
}

// Source files that another file imports by exact module name; these are the
// files whose breakage is guaranteed to surface at import time.
std::vector<std::string> imported_module_files(const EnvState& env) {
  std::set<std::string> imported_targets;
  for (const auto& [file, extraction] : env.extractions) {
    for (const auto& imp : extraction.imports) {
      if (!imp.target.empty()) imported_targets.insert(imp.target);
    }
  }
  std::vector<std::string> files;
  for (const auto& file : env.snapshot.files) {
    if (file.role != FileRole::source) continue;
    fs::path p(file.rel_path);
    std::string base = p.filename().string();
    if (base == "main.py" || base == "__init__.py") continue;
    std::string mod = module_of(file.rel_path);
    if (!mod.empty() && imported_targets.count(mod)) files.push_back(file.rel_path);
  }
  return files;
}

std::optional<std::string> apply_remove_declaration(const fs::path& dir, const EnvState& env,
                                                   std::mt19937_64& rng) {
  std::vector<std::string> candidates;
  for (const auto& node : env.g_ext.nodes) {
    if (node.kind == ExtNodeKind::package && node.origin == PackageOrigin::external &&
        node.declared && node.used_in_code) {
      candidates.push_back(node.id.substr(4));  // strip "pkg:"
    }
  }
  if (candidates.empty()) return std::nullopt;
  std::string package = candidates[pick(rng, candidates.size())];

  auto text = read_file(dir / "requirements.txt");
  if (!text) return std::nullopt;
  std::vector<std::string> lines = split(*text, '\n');
  bool removed = false;
  std::vector<std::string> kept;
  for (const auto& line : lines) {
    if (!removed && normalize_package_name(leading_requirement_name(line)) == package) {
      removed = true;
      continue;
    }
    kept.push_back(line);
  }
  if (!removed) return std::nullopt;
  write_file_atomic(dir / "requirements.txt", join(kept, "\n"));
  return package;
}

std::optional<std::string> apply_rename_module(const fs::path& dir, const EnvState& env,
                                               std::mt19937_64& rng) {
  std::vector<std::string> candidates = imported_module_files(env);
  if (candidates.empty()) return std::nullopt;
  std::string rel = candidates[pick(rng, candidates.size())];
  fs::path old_path = dir / rel;
  fs::path new_path = old_path.parent_path() / (old_path.stem().string() + "x.py");
  if (fs::exists(new_path)) return std::nullopt;
  std::error_code ec;
  fs::rename(old_path, new_path, ec);
  if (ec) return std::nullopt;
  return rel;
}

std::optional<std::string> apply_break_import(const fs::path& dir, const EnvState& env,
                                              std::mt19937_64& rng) {
  std::set<std::string> defined;
  for (const auto& file : env.snapshot.files) {
    if (file.role != FileRole::source) continue;
    std::string mod = module_of(file.rel_path);
    if (!mod.empty()) defined.insert(mod);
  }
  struct Site {
    std::string file;
    int line;
    std::string target;
  };
  std::vector<Site> sites;
  for (const auto& [file, extraction] : env.extractions) {
    for (const auto& imp : extraction.imports) {
      if (imp.relative_level > 0 || imp.target.find('.') == std::string::npos) continue;
      if (!defined.count(imp.target)) continue;
      if (defined.count(imp.target + "x")) continue;
      sites.push_back({file, imp.line, imp.target});
    }
  }
  if (sites.empty()) return std::nullopt;
  std::sort(sites.begin(), sites.end(), [](const Site& a, const Site& b) {
    return std::tie(a.file, a.line, a.target) < std::tie(b.file, b.line, b.target);
  });
  const Site& site = sites[pick(rng, sites.size())];

  auto text = read_file(dir / site.file);
  if (!text) return std::nullopt;
  std::vector<std::string> lines = split(*text, '\n');
  if (site.line < 1 || site.line > static_cast<int>(lines.size())) return std::nullopt;
  std::string& line = lines[site.line - 1];
  std::size_t pos = 0;
  while ((pos = line.find(site.target, pos)) != std::string::npos) {
    bool left_ok = pos == 0 || !is_name_char(line[pos - 1]);
    std::size_t end = pos + site.target.size();
    bool right_ok = end >= line.size() || !is_name_char(line[end]);
    if (left_ok && right_ok) {
      line.insert(end, "x");
      write_file_atomic(dir / site.file, join(lines, "\n"));
      return site.file + ":" + std::to_string(site.line);
    }
    pos = end;
  }
  return std::nullopt;
}

std::optional<std::string> apply_delete_symbol(const fs::path& dir, const EnvState& env,
                                               std::mt19937_64& rng) {
  std::map<std::string, std::string> module_file;  // module -> rel path
  for (const auto& file : env.snapshot.files) {
    if (file.role != FileRole::source) continue;
    std::string mod = module_of(file.rel_path);
    if (!mod.empty()) module_file[mod] = file.rel_path;
  }
  struct Candidate {
    std::string module;
    std::string symbol;
    std::string file;
  };
  std::vector<Candidate> candidates;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& [file, extraction] : env.extractions) {
    for (const auto& imp : extraction.imports) {
      if (imp.imported_symbols.empty()) continue;
      auto it = module_file.find(imp.target);
      if (it == module_file.end()) continue;
      const auto& def_extraction = env.extractions.at(it->second);
      for (const auto& symbol : imp.imported_symbols) {
        for (const auto& def : def_extraction.symbols) {
          if (def.name != symbol) continue;
          if (def.kind == SymbolKind::top_level_binding) continue;
          if (seen.insert({imp.target, symbol}).second) {
            candidates.push_back({imp.target, symbol, it->second});
          }
        }
      }
    }
  }
  if (candidates.empty()) return std::nullopt;
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.module, a.symbol) < std::tie(b.module, b.symbol);
  });
  const Candidate& chosen = candidates[pick(rng, candidates.size())];

  auto text = read_file(dir / chosen.file);
  if (!text) return std::nullopt;
  std::vector<std::string> lines = split(*text, '\n');
  std::size_t start = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    for (const std::string& head :
         {"def " + chosen.symbol, "async def " + chosen.symbol, "class " + chosen.symbol}) {
      if (line.rfind(head, 0) == 0 &&
          (line.size() == head.size() || !is_name_char(line[head.size()]))) {
        start = i;
      }
    }
    if (start != lines.size()) break;
  }
  if (start == lines.size()) return std::nullopt;
  std::size_t end = start + 1;
  while (end < lines.size()) {
    const std::string& line = lines[end];
    if (!line.empty() && !std::isspace(static_cast<unsigned char>(line[0]))) break;
    ++end;
  }
  lines.erase(lines.begin() + start, lines.begin() + end);
  write_file_atomic(dir / chosen.file, join(lines, "\n"));
  return chosen.module + "." + chosen.symbol;
}

std::optional<std::string> apply_syntax_error(const fs::path& dir, const EnvState& env,
                                              std::mt19937_64& rng) {
  std::vector<std::string> candidates = imported_module_files(env);
  if (candidates.empty()) return std::nullopt;
  std::string rel = candidates[pick(rng, candidates.size())];
  auto text = read_file(dir / rel);
  if (!text) return std::nullopt;
  std::string mutated = *text;
  if (!mutated.empty() && mutated.back() != '\n') mutated += '\n';
  mutated += "broken_marker = \"this string never terminates\n";
  write_file_atomic(dir / rel, mutated);
  return rel;
}

struct LogicMutation {
  const char* file;
  const char* find;
  const char* replace;
};

const std::map<std::string, std::vector<LogicMutation>>& logic_mutations() {
  static const std::map<std::string, std::vector<LogicMutation>> kMutations = {
      {"webapp",
       {{"src/util.py", "return a + b", "return a - b"},
        {"src/util.py", "return high", "return low"}}},
      {"service",
       {{"service/models.py", "item.price * item.quantity", "item.price + item.quantity"},
        {"service/models.py", "total = 0", "total = 1"}}},
  };
  return kMutations;
}

std::optional<std::string> apply_logic_fault(const fs::path& dir,
                                             const std::string& template_name,
                                             std::mt19937_64& rng) {
  auto it = logic_mutations().find(template_name);
  if (it == logic_mutations().end() || it->second.empty()) return std::nullopt;
  const LogicMutation& mutation = it->second[pick(rng, it->second.size())];
  auto text = read_file(dir / mutation.file);
  if (!text) return std::nullopt;
  std::size_t pos = text->find(mutation.find);
  if (pos == std::string::npos) return std::nullopt;
  std::string mutated = *text;
  mutated.replace(pos, std::string(mutation.find).size(), mutation.replace);
  write_file_atomic(dir / mutation.file, mutated);
  return std::string(mutation.file);
}

std::optional<std::string> apply_fault(const fs::path& dir, FaultKind kind,
                                       const std::string& template_name,
                                       std::mt19937_64& rng) {
  EnvState env = build_env(dir, ScanConfig{}, default_stdlib_names());
  switch (kind) {
    case FaultKind::remove_declaration: return apply_remove_declaration(dir, env, rng);
    case FaultKind::rename_internal_module: return apply_rename_module(dir, env, rng);
    case FaultKind::break_internal_import: return apply_break_import(dir, env, rng);
    case FaultKind::delete_symbol: return apply_delete_symbol(dir, env, rng);
    case FaultKind::inject_syntax_error: return apply_syntax_error(dir, env, rng);
    case FaultKind::inject_logic_fault: return apply_logic_fault(dir, template_name, rng);
  }
  return std::nullopt;
}

void copy_tree(const fs::path& from, const fs::path& to) {
  fs::create_directories(to);
  fs::copy(from, to, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
}

std::string case_dir_name(int index) {
  std::ostringstream out;
  out << "case_";
  std::string digits = std::to_string(index);
  for (std::size_t i = digits.size(); i < 3; ++i) out << '0';
  out << digits;
  return out.str();
}

}  // namespace

std::vector<CorpusCase> generate_corpus(const fs::path& out_dir, int count, std::uint64_t seed,
                                        const std::vector<std::string>& templates) {
  std::vector<std::string> names = templates.empty() ? builtin_template_names() : templates;

  fs::create_directories(out_dir);
  fs::path harness_dir = out_dir / "_harness";
  write_harness(harness_dir);
  ExecConfig exec = harness_exec_config(harness_dir);

  fs::path template_root = out_dir / "_templates";
  for (const auto& name : names) {
    fs::path dir = template_root / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_template(name, dir);
    if (!pass_exec(run_all(dir, exec))) {
      throw TemplateBroken("template does not pass as written: " + name);
    }
  }

  static const FaultKind kFaults[] = {
      FaultKind::remove_declaration,  FaultKind::rename_internal_module,
      FaultKind::break_internal_import, FaultKind::delete_symbol,
      FaultKind::inject_syntax_error, FaultKind::inject_logic_fault};

  std::vector<CorpusCase> cases;
  for (int i = 0; i < count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 10 && !placed; ++attempt) {
      std::uint64_t sub_seed = sub_seed_for(seed, i, attempt);
      std::mt19937_64 rng(sub_seed);
      const std::string& name = names[pick(rng, names.size())];
      FaultKind kind = kFaults[pick(rng, std::size(kFaults))];

      fs::path dir = out_dir / case_dir_name(i);
      fs::remove_all(dir);
      copy_tree(template_root / name, dir);

      auto target = apply_fault(dir, kind, name, rng);
      if (!target || pass_exec(run_all(dir, exec))) {
        fs::remove_all(dir);
        continue;
      }
      CorpusCase c;
      c.dir = dir;
      c.fault = FaultSpec{kind, sub_seed, target};
      c.ground_truth = ground_truth_for(kind);
      c.base_template = name;
      cases.push_back(std::move(c));
      placed = true;
    }
    if (!placed) {
      throw TemplateBroken("could not derive a failing mutant for case " + std::to_string(i));
    }
  }

  nlohmann::json manifest;
  manifest["cases"] = nlohmann::json::array();
  for (const auto& c : cases) {
    nlohmann::json entry;
    entry["dir"] = c.dir.filename().string();
    entry["fault"]["kind"] = to_string(c.fault.kind);
    entry["fault"]["seed"] = c.fault.seed;
    if (c.fault.target) entry["fault"]["target"] = *c.fault.target;
    entry["ground_truth"] = to_string(c.ground_truth);
    entry["base_template"] = c.base_template;
    manifest["cases"].push_back(std::move(entry));
  }
  manifest["seed"] = seed;
  manifest["templates"] = names;
  write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return cases;
}

std::vector<CorpusCase> load_corpus(const fs::path& corpus_dir) {
  auto text = read_file(corpus_dir / "manifest.json");
  if (!text) throw IoFailure("cannot read manifest: " + (corpus_dir / "manifest.json").string());
  nlohmann::json manifest = nlohmann::json::parse(*text, nullptr, false);
  if (manifest.is_discarded() || !manifest.contains("cases") || !manifest["cases"].is_array()) {
    throw IoFailure("malformed corpus manifest in " + corpus_dir.string());
  }
  std::vector<CorpusCase> cases;
  for (const auto& entry : manifest["cases"]) {
    CorpusCase c;
    c.dir = corpus_dir / entry.at("dir").get<std::string>();
    auto kind = fault_kind_from_string(entry.at("fault").at("kind").get<std::string>());
    auto truth = source_from_string(entry.at("ground_truth").get<std::string>());
    if (!kind || !truth) throw IoFailure("malformed corpus manifest in " + corpus_dir.string());
    c.fault.kind = *kind;
    c.fault.seed = entry.at("fault").value("seed", std::uint64_t{0});
    if (entry.at("fault").contains("target")) {
      c.fault.target = entry.at("fault").at("target").get<std::string>();
    }
    c.ground_truth = *truth;
    c.base_template = entry.value("base_template", std::string{});
    cases.push_back(std::move(c));
  }
  return cases;
}

nlohmann::json AccuracyReport::to_json() const {
  nlohmann::json j;
  j["per_label"] = nlohmann::json::object();
  for (const auto& [label, counts] : per_label) {
    nlohmann::json entry;
    entry["correct"] = counts.first;
    entry["total"] = counts.second;
    if (counts.second > 0) {
      entry["accuracy"] = static_cast<double>(counts.first) / counts.second;
    } else {
      entry["accuracy"] = nullptr;
    }
    j["per_label"][label] = std::move(entry);
  }
  if (overall) {
    j["overall"] = *overall;
  } else {
    j["overall"] = nullptr;
  }
  static const char* kLabels[] = {"external-dependency", "internal-reference", "residual-logic"};
  j["confusion"] = nlohmann::json::object();
  for (int row = 0; row < 3; ++row) {
    nlohmann::json cols;
    for (int col = 0; col < 3; ++col) cols[kLabels[col]] = confusion[row][col];
    j["confusion"][kLabels[row]] = std::move(cols);
  }
  if (!errors.empty()) j["errors"] = errors;
  return j;
}

namespace {

int label_index(AttributionSource source) {
  switch (source) {
    case AttributionSource::external_dependency: return 0;
    case AttributionSource::internal_reference: return 1;
    case AttributionSource::residual_logic: return 2;
    case AttributionSource::pass: return -1;
  }
  return -1;
}

}  // namespace

AccuracyReport evaluate_attribution(const fs::path& corpus_dir, const LoopConfig& config) {
  std::vector<CorpusCase> cases = load_corpus(corpus_dir);

  ExecConfig exec = config.exec;
  if (!exec.install_cmd && !exec.launch_cmd && !exec.test_cmd) {
    exec = harness_exec_config(corpus_dir / "_harness");
  }
  const std::set<std::string>& stdlib =
      config.stdlib.empty() ? default_stdlib_names() : config.stdlib;

  AccuracyReport report;
  int correct_total = 0;
  for (const auto& c : cases) {
    std::string truth_label = to_string(c.ground_truth);
    auto& bucket = report.per_label[truth_label];
    ++bucket.second;

    std::string case_name = c.dir.filename().string();
    AttributionSource predicted = AttributionSource::pass;
    bool ok = false;
    try {
      EnvState env = build_env(c.dir, config.scan, stdlib, config.aliases);
      std::vector<RawExecutionLog> logs = run_all(c.dir, exec);
      std::vector<EvidenceRecord> evidence = normalize(logs, env.g_ext, env.g_int, c.dir);
      if (pass_exec(logs)) {
        predicted = AttributionSource::pass;
      } else {
        predicted = attribute(env.g_ext, env.g_int, evidence).source;
      }
      ok = true;
    } catch (const std::exception& e) {
      report.errors.push_back(case_name + ": " + e.what());
    }

    if (ok) {
      int row = label_index(c.ground_truth);
      int col = label_index(predicted);
      if (row >= 0 && col >= 0) report.confusion[row][col] += 1;
      if (col < 0) {
        report.errors.push_back(case_name + ": predicted pass on a failing case");
      }
      if (predicted == c.ground_truth) {
        ++bucket.first;
        ++correct_total;
      }
    }
  }
  if (!cases.empty()) {
    report.overall = static_cast<double>(correct_total) / static_cast<double>(cases.size());
  }
  return report;
}

}  // namespace envalign
