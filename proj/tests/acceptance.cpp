// Acceptance suite: seven checks, one PASS/FAIL line each on stdout.
// Supporting detail (confusion matrix, violation notes) goes to stderr.
// Exit code is the number of failed checks.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "envalign/align_loop.hpp"
#include "envalign/attribution.hpp"
#include "envalign/corpus.hpp"
#include "envalign/evidence.hpp"
#include "envalign/ext_graph.hpp"
#include "envalign/int_graph.hpp"
#include "envalign/repo_model.hpp"
#include "envalign/revision.hpp"
#include "envalign/stdlib_names.hpp"
#include "envalign/util.hpp"
#include "temp_dir.hpp"

namespace fs = std::filesystem;
using namespace envalign;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// criterion 1: client fixture alignment trace
// ---------------------------------------------------------------------------

bool criterion1(std::string& detail) {
  auto start = Clock::now();
  testing::TempDir tmp;
  write_harness(tmp.path / "h");
  write_client_fixture(tmp.path / "repo");
  LoopConfig cfg;
  cfg.exec = harness_exec_config(tmp.path / "h");
  AlignmentRunReport report = align(tmp.path / "repo", cfg);
  double elapsed = seconds_since(start);

  std::ostringstream why;
  bool ok = true;
  if (report.aborted) { ok = false; why << "aborted: " << report.abort_reason << "; "; }
  if (report.outcome != LoopOutcome::success) { ok = false; why << "outcome not success; "; }
  if (report.iterations.size() != 3) {
    ok = false;
    why << report.iterations.size() << " iterations; ";
  } else {
    const auto& it1 = report.iterations[0];
    const auto& it2 = report.iterations[1];
    const auto& it3 = report.iterations[2];
    if (it1.verdict.source != AttributionSource::external_dependency) {
      ok = false; why << "iter1 not external; ";
    }
    if (std::find(it1.verdict.supporting_nodes.begin(), it1.verdict.supporting_nodes.end(),
                  "pkg:requests") == it1.verdict.supporting_nodes.end()) {
      ok = false; why << "iter1 subject not requests; ";
    }
    if (it2.verdict.source != AttributionSource::internal_reference) {
      ok = false; why << "iter2 not internal; ";
    }
    if (it2.evidence.empty() || it2.evidence[0].subject != "app.client") {
      ok = false; why << "iter2 subject not app.client; ";
    }
    if (it3.verdict.source != AttributionSource::pass) { ok = false; why << "iter3 not pass; "; }
  }
  if (elapsed >= 30.0) { ok = false; why << "too slow; "; }

  std::ostringstream d;
  d << "external->internal->pass in " << elapsed << "s";
  if (!ok) d << " [" << why.str() << "]";
  detail = d.str();
  return ok;
}

// ---------------------------------------------------------------------------
// criterion 2: graph oracle equivalence on random repos
// ---------------------------------------------------------------------------
// The oracle below re-derives dependency gaps and unresolved references
// directly from the generated file descriptions with its own helper code,
// sharing nothing with the graph builders except the stdlib name list.

struct GenImport {
  std::string target;
  int level = 0;
  std::vector<std::string> symbols;
};

struct GenFile {
  std::string rel;
  std::vector<GenImport> imports;
  std::string text;
};

struct GenRepo {
  std::vector<GenFile> sources;
  std::optional<std::vector<std::string>> declared;  // manifest lines when present
};

std::vector<std::string> oracle_split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) { out.push_back(cur); cur.clear(); } else { cur += c; }
  }
  out.push_back(cur);
  return out;
}

std::string oracle_module_of(const std::string& rel) {
  std::string s = rel;
  const std::string init = "__init__.py";
  if (s == init) return "";
  if (s.size() > init.size() + 1 && s.compare(s.size() - init.size(), init.size(), init) == 0) {
    s = s.substr(0, s.size() - init.size() - 1);  // drop "/__init__.py"
  } else {
    s = s.substr(0, s.size() - 3);  // drop ".py"
  }
  for (char& c : s) {
    if (c == '/') c = '.';
  }
  return s;
}

double oracle_suffix_sim(const std::string& target, const std::string& module) {
  auto t = oracle_split(target, '.');
  auto m = oracle_split(module, '.');
  std::size_t shared = 0;
  while (shared < t.size() && shared < m.size() &&
         t[t.size() - 1 - shared] == m[m.size() - 1 - shared]) {
    ++shared;
  }
  if (t.empty()) return 0.0;
  return static_cast<double>(shared) / static_cast<double>(t.size());
}

std::string oracle_normalize(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (c == '_' || c == '.') out += '-';
    else out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

enum class OracleClass { internal, stdlib_pkg, external };

OracleClass oracle_classify(const GenImport& imp, const std::set<std::string>& internal_modules,
                            const std::set<std::string>& stdlib) {
  if (imp.level > 0) return OracleClass::internal;
  if (imp.target.empty()) return OracleClass::internal;
  std::string first = oracle_split(imp.target, '.').front();
  for (const auto& mod : internal_modules) {
    if (oracle_split(mod, '.').front() == first) return OracleClass::internal;
  }
  if (stdlib.count(first)) return OracleClass::stdlib_pkg;
  for (const auto& mod : internal_modules) {
    if (oracle_suffix_sim(imp.target, mod) >= 0.5) return OracleClass::internal;
  }
  return OracleClass::external;
}

std::string oracle_absolute(const GenImport& imp, const std::string& importer_module,
                            bool importer_is_init) {
  if (imp.level == 0) return imp.target;
  auto base = oracle_split(importer_module, '.');
  if (importer_module.empty()) base.clear();
  if (!importer_is_init && !base.empty()) base.pop_back();
  for (int i = 1; i < imp.level; ++i) {
    if (base.empty()) return std::string(imp.level, '.') + imp.target;
    base.pop_back();
  }
  std::string abs;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (i) abs += '.';
    abs += base[i];
  }
  if (!imp.target.empty()) {
    if (!abs.empty()) abs += '.';
    abs += imp.target;
  }
  return abs;
}

GenRepo generate_random_repo(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&rng](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

  const std::vector<std::string> dirs_pool{"pkg", "core", "svc"};
  const std::vector<std::string> stems{"alpha", "beta", "gamma", "delta", "omega",
                                       "util",  "jobs", "api",   "models"};
  const std::vector<std::string> stdlib_pool{"os", "sys", "json", "math", "re"};
  const std::vector<std::string> external_pool{"requests", "flask", "numpy", "pandas",
                                               "leftpad3"};
  const std::vector<std::string> bogus_pool{"ghost.mod",    "pkg.ghost", "core.missing",
                                            "numpy.linalg", "os.path",   "svc.nothing.deep"};

  GenRepo repo;
  std::set<std::string> rels;
  auto add_file = [&](const std::string& rel) -> GenFile* {
    if (!rels.insert(rel).second) return nullptr;
    repo.sources.push_back({rel, {}, ""});
    return &repo.sources.back();
  };

  std::size_t ndirs = pick(3);  // 0..2 package directories
  std::vector<std::string> dirs;
  for (std::size_t i = 0; i < ndirs; ++i) dirs.push_back(dirs_pool[i]);
  for (const auto& d : dirs) {
    if (pick(5) != 0) add_file(d + "/__init__.py");  // usually a proper package
    std::size_t nfiles = 1 + pick(3);
    for (std::size_t i = 0; i < nfiles; ++i) add_file(d + "/" + stems[pick(stems.size())] + ".py");
  }
  std::size_t nroot = 1 + pick(3);
  for (std::size_t i = 0; i < nroot; ++i) add_file(stems[pick(stems.size())] + ".py");

  std::vector<std::string> modules;
  for (const auto& f : repo.sources) {
    std::string mod = oracle_module_of(f.rel);
    if (!mod.empty()) modules.push_back(mod);
  }

  for (auto& f : repo.sources) {
    std::size_t nimports = pick(4);
    std::ostringstream text;
    int line = 0;
    auto emit = [&](const GenImport& imp, bool from_style) {
      ++line;
      (void)line;
      if (imp.level > 0 || from_style) {
        text << "from " << std::string(static_cast<std::size_t>(imp.level), '.') << imp.target
             << " import ";
        for (std::size_t i = 0; i < imp.symbols.size(); ++i) {
          if (i) text << ", ";
          text << imp.symbols[i];
        }
        text << "\n";
      } else {
        text << "import " << imp.target << "\n";
      }
      f.imports.push_back(imp);
    };
    for (std::size_t i = 0; i < nimports; ++i) {
      switch (pick(6)) {
        case 0: emit({stdlib_pool[pick(stdlib_pool.size())], 0, {}}, false); break;
        case 1: emit({external_pool[pick(external_pool.size())], 0, {}}, false); break;
        case 2:
          if (!modules.empty()) emit({modules[pick(modules.size())], 0, {}}, false);
          break;
        case 3: emit({bogus_pool[pick(bogus_pool.size())], 0, {}}, false); break;
        case 4:
          if (!modules.empty()) emit({modules[pick(modules.size())], 0, {"thing"}}, true);
          break;
        case 5: emit({stems[pick(stems.size())], 1, {"helper"}}, true); break;
      }
    }
    text << "value = 1\n";
    f.text = text.str();
  }

  if (pick(5) != 0) {
    std::vector<std::string> declared;
    for (const auto& pkg : external_pool) {
      if (pick(2) == 0) declared.push_back(pkg);
    }
    if (pick(3) == 0) declared.push_back("unusedpkg");
    repo.declared = declared;
  }
  return repo;
}

bool criterion2(std::string& detail) {
  auto start = Clock::now();
  const std::set<std::string> stdlib = default_stdlib_names();
  int violations = 0;
  std::ostringstream why;

  for (int r = 0; r < 100; ++r) {
    GenRepo repo = generate_random_repo(5000 + static_cast<std::uint64_t>(r));
    testing::TempDir tmp;
    for (const auto& f : repo.sources) write_file_atomic(tmp.path / f.rel, f.text);
    if (repo.declared) {
      std::string text;
      for (const auto& line : *repo.declared) text += line + "\n";
      write_file_atomic(tmp.path / "requirements.txt", text);
    }

    EnvState env = build_env(tmp.path, ScanConfig{}, stdlib);

    // --- oracle: dependency gaps ---
    std::set<std::string> internal_modules;
    for (const auto& f : repo.sources) {
      std::string mod = oracle_module_of(f.rel);
      if (!mod.empty()) internal_modules.insert(mod);
    }
    std::map<std::string, std::set<std::string>> used;  // package -> using files
    for (const auto& f : repo.sources) {
      for (const auto& imp : f.imports) {
        if (oracle_classify(imp, internal_modules, stdlib) == OracleClass::external) {
          used[oracle_normalize(oracle_split(imp.target, '.').front())].insert(f.rel);
        }
      }
    }
    std::set<std::string> declared;
    if (repo.declared) {
      for (const auto& line : *repo.declared) declared.insert(oracle_normalize(line));
    }
    std::map<std::string, std::set<std::string>> oracle_undeclared;
    std::set<std::string> oracle_unused;
    for (const auto& [pkg, files] : used) {
      if (!declared.count(pkg)) oracle_undeclared[pkg] = files;
    }
    for (const auto& pkg : declared) {
      if (!used.count(pkg) && !stdlib.count(pkg)) oracle_unused.insert(pkg);
    }

    std::map<std::string, std::set<std::string>> got_undeclared;
    std::set<std::string> got_unused;
    for (const auto& gap : find_dependency_gaps(env.g_ext)) {
      if (gap.kind == GapKind::used_not_declared) {
        got_undeclared[gap.package] =
            std::set<std::string>(gap.using_files.begin(), gap.using_files.end());
      } else {
        got_unused.insert(gap.package);
      }
    }

    // --- oracle: unresolved references ---
    std::set<std::string> oracle_unres;
    for (const auto& f : repo.sources) {
      std::string mod = oracle_module_of(f.rel);
      if (mod.empty()) continue;
      bool is_init = f.rel.size() >= 11 && f.rel.compare(f.rel.size() - 11, 11, "__init__.py") == 0;
      for (const auto& imp : f.imports) {
        if (oracle_classify(imp, internal_modules, stdlib) != OracleClass::internal) continue;
        std::string target = oracle_absolute(imp, mod, is_init);
        if (target.empty()) continue;
        if (!internal_modules.count(target)) oracle_unres.insert(target);
      }
    }
    std::set<std::string> got_unres;
    for (const auto& ref : find_unresolved_refs(env.g_int)) got_unres.insert(ref.target);

    if (got_undeclared != oracle_undeclared || got_unused != oracle_unused ||
        got_unres != oracle_unres) {
      ++violations;
      if (violations <= 3) why << "repo " << r << " diverges; ";
    }
  }

  double elapsed = seconds_since(start);
  bool ok = violations == 0 && elapsed < 60.0;
  std::ostringstream d;
  d << "100 repos, " << violations << " divergences, " << elapsed << "s";
  if (!ok) d << " [" << why.str() << (elapsed >= 60.0 ? "too slow" : "") << "]";
  detail = d.str();
  return ok;
}

// ---------------------------------------------------------------------------
// criterion 3: attribution accuracy on the synthetic corpus
// ---------------------------------------------------------------------------

bool criterion3(const fs::path& corpus_dir, std::string& detail) {
  auto start = Clock::now();
  auto cases = generate_corpus(corpus_dir, 200, 7, {});

  std::map<FaultKind, int> kind_counts;
  for (const auto& c : cases) ++kind_counts[c.fault.kind];
  bool all_kinds = kind_counts.size() == 6;

  LoopConfig cfg;
  AccuracyReport report = evaluate_attribution(corpus_dir, cfg);

  double overall = report.overall.value_or(0.0);
  auto residual = report.per_label.find("residual-logic");
  bool logic_perfect = residual != report.per_label.end() &&
                       residual->second.first == residual->second.second &&
                       residual->second.second == kind_counts[FaultKind::inject_logic_fault];

  const char* labels[3] = {"external-dependency", "internal-reference", "residual-logic"};
  std::cerr << "confusion matrix (rows = ground truth, cols = predicted):\n";
  for (int i = 0; i < 3; ++i) {
    std::cerr << "  " << labels[i] << ":";
    for (int j = 0; j < 3; ++j) std::cerr << " " << report.confusion[i][j];
    std::cerr << "\n";
  }
  for (const auto& err : report.errors) std::cerr << "  error: " << err << "\n";

  double elapsed = seconds_since(start);
  bool ok = all_kinds && overall >= 0.95 && logic_perfect && elapsed < 600.0;
  std::ostringstream d;
  d << "accuracy " << overall << " on 200 cases, logic-fault "
    << (residual != report.per_label.end() ? residual->second.first : 0) << "/"
    << kind_counts[FaultKind::inject_logic_fault] << ", " << elapsed << "s";
  if (!all_kinds) d << " [missing fault kinds]";
  detail = d.str();
  return ok;
}

// ---------------------------------------------------------------------------
// criterion 4: priority-ordering property
// ---------------------------------------------------------------------------

bool criterion4(std::string& detail) {
  testing::TempDir clean_dir;
  write_file_atomic(clean_dir.path / "a.py", "x = 1\n");
  EnvState clean = build_env(clean_dir.path, ScanConfig{}, default_stdlib_names());

  testing::TempDir gapped_dir;
  write_client_fixture(gapped_dir.path);
  EnvState gapped = build_env(gapped_dir.path, ScanConfig{}, default_stdlib_names());

  testing::TempDir perr_dir;
  write_file_atomic(perr_dir.path / "bad.py", "s = \"never closed\n");
  EnvState perr = build_env(perr_dir.path, ScanConfig{}, default_stdlib_names());

  struct Env {
    const EnvState* env;
    bool has_gap;
    bool has_int_node;
  };
  auto has_gap = [](const EnvState& e) {
    for (const auto& g : find_dependency_gaps(e.g_ext)) {
      if (g.kind == GapKind::used_not_declared) return true;
    }
    return false;
  };
  auto has_int_node = [](const EnvState& e) {
    for (const auto& n : e.g_int.nodes) {
      if (n.kind == IntNodeKind::unresolved_ref || n.kind == IntNodeKind::parse_error) return true;
    }
    return false;
  };
  const Env envs[3] = {{&clean, has_gap(clean), has_int_node(clean)},
                       {&gapped, has_gap(gapped), has_int_node(gapped)},
                       {&perr, has_gap(perr), has_int_node(perr)}};

  const EvidenceKind kinds[] = {
      EvidenceKind::dependency_install_failure, EvidenceKind::missing_module,
      EvidenceKind::missing_symbol,             EvidenceKind::parse_failure,
      EvidenceKind::test_assertion_failure,     EvidenceKind::runtime_exception_other,
      EvidenceKind::timeout,                    EvidenceKind::nonzero_exit_other};
  const OriginHint hints[] = {OriginHint::external, OriginHint::internal, OriginHint::unknown};
  const Phase phases[] = {Phase::install, Phase::launch, Phase::test};

  std::mt19937_64 rng(1234);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Env& e = envs[rng() % 3];
    std::size_t n = 1 + rng() % 4;
    std::vector<EvidenceRecord> evidence;
    bool ext_pred = false;
    bool int_pred = e.has_int_node;  // node clauses fire on any evidence
    bool downstream = false;
    for (std::size_t i = 0; i < n; ++i) {
      EvidenceRecord rec;
      rec.phase = phases[rng() % 3];
      rec.kind = kinds[rng() % 8];
      rec.origin_hint = hints[rng() % 3];
      rec.excerpt = "excerpt";
      if (rec.kind == EvidenceKind::missing_module || rec.kind == EvidenceKind::missing_symbol) {
        rec.subject = "subject";
      }
      if (rec.phase != Phase::install) downstream = true;
      if (rec.kind == EvidenceKind::dependency_install_failure) ext_pred = true;
      if (rec.kind == EvidenceKind::missing_module) {
        if (rec.origin_hint != OriginHint::internal) ext_pred = true;
        else int_pred = true;
      }
      if (rec.kind == EvidenceKind::missing_symbol || rec.kind == EvidenceKind::parse_failure) {
        int_pred = true;
      }
      evidence.push_back(std::move(rec));
    }
    if (downstream && e.has_gap) ext_pred = true;

    AttributionVerdict v = attribute(e.env->g_ext, e.env->g_int, evidence);
    AttributionSource expected = ext_pred   ? AttributionSource::external_dependency
                                 : int_pred ? AttributionSource::internal_reference
                                            : AttributionSource::residual_logic;
    if (v.source != expected) {
      ++violations;
      if (violations <= 3) {
        std::cerr << "  trial " << trial << ": expected " << to_string(expected) << ", got "
                  << to_string(v.source) << "\n";
      }
    }
  }

  std::ostringstream d;
  d << "1000 combinations, " << violations << " violations";
  detail = d.str();
  return violations == 0;
}

// ---------------------------------------------------------------------------
// criterion 5: loop contract over the corpus
// ---------------------------------------------------------------------------

bool criterion5(const fs::path& corpus_dir, std::string& detail) {
  auto start = Clock::now();
  auto cases = load_corpus(corpus_dir);
  LoopConfig cfg;
  cfg.exec = harness_exec_config(corpus_dir / "_harness");
  cfg.budget = 4;

  int violations = 0;
  auto note = [&violations](const fs::path& dir, const std::string& what) {
    ++violations;
    if (violations <= 5) std::cerr << "  " << dir.filename().string() << ": " << what << "\n";
  };

  for (const auto& c : cases) {
    AlignmentRunReport report = align(c.dir, cfg);
    if (report.aborted) { note(c.dir, "aborted"); continue; }
    if (report.iterations.empty() || report.iterations.size() > 4) {
      note(c.dir, "iteration count out of range");
      continue;
    }
    for (std::size_t i = 0; i < report.iterations.size(); ++i) {
      const auto& it = report.iterations[i];
      bool last = i + 1 == report.iterations.size();
      if (it.verdict.source == AttributionSource::pass) {
        // early exit: a pass must end the run, with success and no plan
        if (!last || report.outcome != LoopOutcome::success) note(c.dir, "no early exit on pass");
        if (it.plan.has_value()) note(c.dir, "plan on pass iteration");
      } else {
        // verdict-plan coherence
        if (!it.plan.has_value() || it.plan->verdict.source != it.verdict.source ||
            it.plan->directives.empty()) {
          note(c.dir, "incoherent plan");
        }
      }
      // digest chaining: repairs (and only repairs) move the snapshot digest
      if (!last) {
        bool changed = it.apply_result.has_value() && !it.apply_result->applied.empty();
        bool revised = it.reviser_invoked && it.reviser_succeeded;
        const auto& next = report.iterations[i + 1];
        if (changed && next.snapshot_digest == it.snapshot_digest) {
          note(c.dir, "repair did not move the digest");
        }
        if (!changed && !revised && next.snapshot_digest != it.snapshot_digest) {
          note(c.dir, "digest moved without a repair");
        }
      }
    }
    std::string rescan = scan_repository(c.dir, cfg.scan).digest;
    if (report.final_digest != rescan) note(c.dir, "final digest does not match a rescan");
    bool last_pass = report.iterations.back().verdict.source == AttributionSource::pass;
    if (last_pass != (report.outcome == LoopOutcome::success)) {
      note(c.dir, "outcome disagrees with final verdict");
    }
  }

  double elapsed = seconds_since(start);
  std::ostringstream d;
  d << cases.size() << " cases under budget 4, " << violations << " violations, " << elapsed
    << "s";
  detail = d.str();
  return violations == 0;
}

// ---------------------------------------------------------------------------
// criterion 6: mechanical-repair minimality and idempotence
// ---------------------------------------------------------------------------

bool criterion6(std::string& detail) {
  std::mt19937_64 rng(777);
  int violations = 0;
  auto note = [&violations](int i, const std::string& what) {
    ++violations;
    if (violations <= 5) std::cerr << "  check " << i << ": " << what << "\n";
  };

  for (int i = 0; i < 100; ++i) {
    testing::TempDir tmp;
    if (i % 2 == 0) {
      // rewrite-import: only the recorded lines may change
      const std::vector<std::string> pool{"import app.client", "import app.clientx", "x = 1",
                                          "# comment", "from app.client import Thing",
                                          "import os"};
      std::size_t nlines = 2 + rng() % 8;
      std::vector<std::string> lines;
      std::vector<int> hits;
      for (std::size_t k = 0; k < nlines; ++k) {
        const std::string& line = pool[rng() % pool.size()];
        lines.push_back(line);
        if (line == "import app.client" || line == "from app.client import Thing") {
          hits.push_back(static_cast<int>(k) + 1);
        }
      }
      if (hits.empty()) { lines.push_back("import app.client"); hits.push_back(static_cast<int>(lines.size())); }
      std::string before;
      for (const auto& line : lines) before += line + "\n";
      tmp.write("a.py", before);

      RevisionDirective d;
      d.action = RevisionAction::rewrite_import;
      d.target_file = "a.py";
      d.old_target = "app.client";
      d.new_target = "src.client";
      d.lines = hits;
      d.expected_file_digest = file_digest(before);
      RevisionPlan plan;
      plan.verdict.source = AttributionSource::internal_reference;
      plan.directives = {d};
      apply_mechanical(plan, tmp.path);
      std::string once = tmp.read("a.py");

      std::vector<std::string> expected = lines;
      for (int ln : hits) {
        std::string& line = expected[static_cast<std::size_t>(ln - 1)];
        auto pos = line.find("app.client");
        line = line.substr(0, pos) + "src.client" + line.substr(pos + 10);
      }
      std::string want;
      for (const auto& line : expected) want += line + "\n";
      if (once != want) note(i, "rewrite changed more or less than the recorded lines");

      apply_mechanical(plan, tmp.path);
      if (tmp.read("a.py") != once) note(i, "rewrite double-apply differs");
    } else {
      // add-declaration: exactly one line is appended, once
      const std::vector<std::string> pool{"alpha", "beta", "gamma"};
      std::string before;
      bool have_manifest = rng() % 4 != 0;
      if (have_manifest) {
        for (const auto& pkg : pool) {
          if (rng() % 2 == 0) before += pkg + "\n";
        }
        tmp.write("requirements.txt", before);
      }

      RevisionDirective d;
      d.action = RevisionAction::add_declaration;
      d.target_file = "requirements.txt";
      d.package = "newpkg";
      if (have_manifest) d.expected_file_digest = file_digest(before);
      RevisionPlan plan;
      plan.verdict.source = AttributionSource::external_dependency;
      plan.directives = {d};
      apply_mechanical(plan, tmp.path);
      std::string once = tmp.read("requirements.txt");
      if (once != before + "newpkg\n") note(i, "declaration is not a one-line append");

      apply_mechanical(plan, tmp.path);
      if (tmp.read("requirements.txt") != once) note(i, "declaration double-apply differs");
    }
  }

  std::ostringstream d;
  d << "100 byte-diff checks, " << violations << " violations";
  detail = d.str();
  return violations == 0;
}

// ---------------------------------------------------------------------------
// criterion 7: determinism
// ---------------------------------------------------------------------------

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    auto text = read_file(entry.path());
    out[fs::relative(entry.path(), root).generic_string()] = text.value_or("<unreadable>");
  }
  return out;
}

bool criterion7(std::string& detail) {
  std::ostringstream why;
  bool ok = true;

  // graph JSON across two independently created fixture checkouts
  {
    testing::TempDir a;
    testing::TempDir b;
    write_client_fixture(a.path);
    write_client_fixture(b.path);
    EnvState ea = build_env(a.path, ScanConfig{}, default_stdlib_names());
    EnvState eb = build_env(b.path, ScanConfig{}, default_stdlib_names());
    if (ea.g_ext.to_json().dump(2) != eb.g_ext.to_json().dump(2) ||
        ea.g_int.to_json().dump(2) != eb.g_int.to_json().dump(2)) {
      ok = false;
      why << "graph JSON differs; ";
    }
  }

  // corpus trees across two generations with the same seed
  {
    testing::TempDir tmp;
    generate_corpus(tmp.path / "a", 30, 99, {});
    generate_corpus(tmp.path / "b", 30, 99, {});
    if (tree_bytes(tmp.path / "a") != tree_bytes(tmp.path / "b")) {
      ok = false;
      why << "corpus trees differ; ";
    }
  }

  // run reports across two runs over the same workspace path
  {
    testing::TempDir tmp;
    write_harness(tmp.path / "h");
    fs::path repo = tmp.path / "repo";
    write_client_fixture(repo);
    LoopConfig cfg;
    cfg.exec = harness_exec_config(tmp.path / "h");
    AlignmentRunReport ra = align(repo, cfg);
    fs::remove_all(repo);
    write_client_fixture(repo);
    AlignmentRunReport rb = align(repo, cfg);
    auto scrub = [](nlohmann::json j) {
      for (auto& it : j["iterations"]) {
        for (auto& log : it["logs"]) log["duration_seconds"] = 0;
      }
      return j.dump();
    };
    if (scrub(ra.to_json()) != scrub(rb.to_json())) {
      ok = false;
      why << "run reports differ; ";
    }
  }

  detail = ok ? "graphs, corpus trees, and reports byte-identical"
              : "not byte-identical [" + why.str() + "]";
  return ok;
}

}  // namespace

int main() {
  testing::TempDir corpus_tmp;
  fs::path corpus_dir = corpus_tmp.path / "corpus";

  struct Entry {
    const char* name;
    bool ok;
    std::string detail;
  };
  std::vector<Entry> results;

  {
    std::string d;
    results.push_back({"criterion-1 fixture-alignment-trace", criterion1(d), d});
  }
  {
    std::string d;
    results.push_back({"criterion-2 graph-oracle-equivalence", criterion2(d), d});
  }
  {
    std::string d;
    results.push_back({"criterion-3 attribution-accuracy", criterion3(corpus_dir, d), d});
  }
  {
    std::string d;
    results.push_back({"criterion-4 priority-ordering", criterion4(d), d});
  }
  {
    std::string d;
    results.push_back({"criterion-5 loop-contract", criterion5(corpus_dir, d), d});
  }
  {
    std::string d;
    results.push_back({"criterion-6 repair-minimality-idempotence", criterion6(d), d});
  }
  {
    std::string d;
    results.push_back({"criterion-7 determinism", criterion7(d), d});
  }

  int failures = 0;
  for (const auto& r : results) {
    if (!r.ok) ++failures;
    std::cout << (r.ok ? "PASS " : "FAIL ") << r.name << " — " << r.detail << "\n";
  }
  return failures;
}
