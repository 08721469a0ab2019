#include "envalign/revision.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "envalign/subprocess.hpp"
#include "envalign/util.hpp"

namespace envalign {

namespace fs = std::filesystem;

const char* to_string(RevisionAction action) {
  switch (action) {
    case RevisionAction::add_declaration: return "add-declaration";
    case RevisionAction::rewrite_import: return "rewrite-import";
    case RevisionAction::create_package_initializer: return "create-package-initializer";
    case RevisionAction::delegate_to_reviser: return "delegate-to-reviser";
  }
  return "delegate-to-reviser";
}

nlohmann::json RevisionDirective::to_json() const {
  nlohmann::json j;
  j["action"] = to_string(action);
  j["target_file"] = target_file;
  switch (action) {
    case RevisionAction::add_declaration:
      j["payload"] = {{"package", package}};
      if (constraint) j["payload"]["constraint"] = *constraint;
      break;
    case RevisionAction::rewrite_import:
      j["payload"] = {{"old_target", old_target}, {"new_target", new_target}, {"lines", lines}};
      break;
    case RevisionAction::create_package_initializer:
      j["payload"] = {{"directory", directory}};
      break;
    case RevisionAction::delegate_to_reviser:
      j["payload"] = {{"focus", to_string(focus)},
                      {"evidence_indices", evidence_indices},
                      {"node_ids", node_ids},
                      {"instruction", instruction}};
      break;
  }
  if (!expected_file_digest.empty()) j["expected_file_digest"] = expected_file_digest;
  return j;
}

nlohmann::json RevisionPlan::to_json() const {
  nlohmann::json j;
  j["verdict"] = verdict.to_json();
  j["directives"] = nlohmann::json::array();
  for (const auto& d : directives) j["directives"].push_back(d.to_json());
  return j;
}

nlohmann::json ApplyResult::to_json() const {
  nlohmann::json j;
  j["applied"] = nlohmann::json::array();
  for (const auto& d : applied) j["applied"].push_back(d.to_json());
  j["skipped"] = nlohmann::json::array();
  for (const auto& [d, reason] : skipped) {
    j["skipped"].push_back({{"directive", d.to_json()}, {"reason", reason}});
  }
  return j;
}

namespace {

const char* kManifestPreference[] = {"requirements.txt", "pyproject.toml", "setup.py",
                                     "setup.cfg"};

// First existing manifest in preference order; created requirement-list
// manifest otherwise.
std::pair<std::string, std::string> primary_manifest(const RepoSnapshot& snapshot) {
  for (const char* name : kManifestPreference) {
    const RepoFile* best = nullptr;
    for (const auto& file : snapshot.files) {
      if (file.role != FileRole::manifest) continue;
      if (fs::path(file.rel_path).filename() != name) continue;
      if (!best || file.rel_path.size() < best->rel_path.size()) best = &file;
    }
    if (best) {
      return {best->rel_path, best->text ? file_digest(*best->text) : std::string()};
    }
  }
  return {"requirements.txt", ""};
}

RevisionDirective delegate_directive(const AttributionVerdict& verdict,
                                     const std::string& instruction) {
  RevisionDirective d;
  d.action = RevisionAction::delegate_to_reviser;
  d.focus = verdict.source;
  d.evidence_indices = verdict.supporting_evidence;
  d.node_ids = verdict.supporting_nodes;
  d.instruction = instruction;
  return d;
}

bool replace_dotted(std::string& line, const std::string& old_target,
                    const std::string& new_target) {
  auto is_name_char = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  };
  bool changed = false;
  size_t pos = 0;
  while ((pos = line.find(old_target, pos)) != std::string::npos) {
    bool left_ok = pos == 0 || (!is_name_char(line[pos - 1]) && line[pos - 1] != '.');
    size_t end = pos + old_target.size();
    bool right_ok = end >= line.size() || (!is_name_char(line[end]) && line[end] != '.');
    if (left_ok && right_ok) {
      line.replace(pos, old_target.size(), new_target);
      pos += new_target.size();
      changed = true;
    } else {
      pos += old_target.size();
    }
  }
  return changed;
}

}  // namespace

RevisionPlan plan_revision(const AttributionVerdict& verdict, const ExternalEnvGraph& g_ext,
                           const RepoDependencyGraph& g_int,
                           const std::vector<EvidenceRecord>& evidence,
                           const RepoSnapshot& snapshot) {
  RevisionPlan plan;
  plan.verdict = verdict;

  if (verdict.source == AttributionSource::pass) return plan;

  if (verdict.source == AttributionSource::external_dependency) {
    std::set<std::string> subjects;
    for (const auto& rec : evidence) {
      if (rec.subject) {
        subjects.insert(normalize_package_name(rec.subject->substr(0, rec.subject->find('.'))));
      }
    }
    std::vector<DependencyGap> gaps;
    for (auto& gap : find_dependency_gaps(g_ext)) {
      if (gap.kind == GapKind::used_not_declared) gaps.push_back(std::move(gap));
    }
    std::vector<DependencyGap> implicated;
    for (const auto& gap : gaps) {
      if (subjects.count(gap.package)) implicated.push_back(gap);
    }
    if (implicated.empty()) implicated = gaps;  // graph-guided fallback

    auto [manifest, digest] = primary_manifest(snapshot);
    for (const auto& gap : implicated) {
      RevisionDirective d;
      d.action = RevisionAction::add_declaration;
      d.target_file = manifest;
      d.package = gap.package;
      d.expected_file_digest = digest;
      plan.directives.push_back(std::move(d));
    }
    if (plan.directives.empty()) {
      plan.directives.push_back(
          delegate_directive(verdict, "resolve the external dependency failure"));
    }
    return plan;
  }

  if (verdict.source == AttributionSource::internal_reference) {
    std::set<std::string> init_dirs;
    std::vector<std::string> delegated_nodes;

    for (const auto& ref : find_unresolved_refs(g_int)) {
      const IntNode* node = g_int.find("unres:" + ref.target);
      if (ref.best_match) {
        // one rewrite directive per importing file
        std::map<std::string, std::vector<int>> lines_by_file;
        if (node) {
          for (const auto& site : node->importers) {
            lines_by_file[site.file].push_back(site.line);
          }
        }
        for (auto& [file, lines] : lines_by_file) {
          RevisionDirective d;
          d.action = RevisionAction::rewrite_import;
          d.target_file = file;
          d.old_target = ref.target;
          d.new_target = ref.best_match->first;
          std::sort(lines.begin(), lines.end());
          d.lines = std::move(lines);
          if (const RepoFile* rf = snapshot.find(file); rf && rf->text) {
            d.expected_file_digest = file_digest(*rf->text);
          }
          plan.directives.push_back(std::move(d));
        }
        continue;
      }
      // unresolved prefix over an initializer-less package directory
      auto segments = split(ref.target, '.');
      bool handled = false;
      std::string dir;
      for (const auto& seg : segments) {
        dir = dir.empty() ? seg : dir + "/" + seg;
        bool has_source_below = false;
        bool has_init = snapshot.find(dir + "/__init__.py") != nullptr;
        for (const auto& file : snapshot.files) {
          if (file.role == FileRole::source && file.rel_path.size() > dir.size() + 1 &&
              file.rel_path.compare(0, dir.size() + 1, dir + "/") == 0) {
            has_source_below = true;
            break;
          }
        }
        if (has_source_below && !has_init) {
          if (init_dirs.insert(dir).second) {
            RevisionDirective d;
            d.action = RevisionAction::create_package_initializer;
            d.target_file = dir + "/__init__.py";
            d.directory = dir;
            plan.directives.push_back(std::move(d));
          }
          handled = true;
        }
      }
      if (!handled) delegated_nodes.push_back("unres:" + ref.target);
    }

    bool missing_symbols = std::any_of(evidence.begin(), evidence.end(), [](const auto& rec) {
      return rec.kind == EvidenceKind::missing_symbol;
    });
    if (missing_symbols || !delegated_nodes.empty()) {
      auto d = delegate_directive(verdict, "restore unresolved internal references");
      d.node_ids.insert(d.node_ids.end(), delegated_nodes.begin(), delegated_nodes.end());
      std::sort(d.node_ids.begin(), d.node_ids.end());
      d.node_ids.erase(std::unique(d.node_ids.begin(), d.node_ids.end()), d.node_ids.end());
      plan.directives.push_back(std::move(d));
    }
    if (plan.directives.empty()) {
      plan.directives.push_back(
          delegate_directive(verdict, "restore unresolved internal references"));
    }
    std::stable_sort(plan.directives.begin(), plan.directives.end(),
                     [](const RevisionDirective& a, const RevisionDirective& b) {
                       if (a.action != b.action) {
                         return static_cast<int>(a.action) < static_cast<int>(b.action);
                       }
                       if (a.target_file != b.target_file) return a.target_file < b.target_file;
                       return a.old_target < b.old_target;
                     });
    return plan;
  }

  // residual-logic
  auto d = delegate_directive(verdict, "fix the failing validation logic");
  plan.directives.push_back(std::move(d));
  return plan;
}

ApplyResult apply_mechanical(const RevisionPlan& plan, const fs::path& workspace) {
  ApplyResult result;
  for (const auto& directive : plan.directives) {
    if (directive.action == RevisionAction::delegate_to_reviser) {
      result.skipped.emplace_back(directive, "requires-reviser");
      continue;
    }
    fs::path path = workspace / fs::path(directive.target_file);
    auto current = read_file(path);

    if (directive.action == RevisionAction::create_package_initializer) {
      if (current) {
        result.applied.push_back(directive);  // already present
        continue;
      }
      if (!write_file_atomic(path, "")) {
        result.skipped.emplace_back(directive, "io-failure");
        continue;
      }
      result.applied.push_back(directive);
      continue;
    }

    // stale-snapshot guard for edits
    if (directive.expected_file_digest.empty()) {
      if (current && directive.action != RevisionAction::add_declaration) {
        result.skipped.emplace_back(directive, "stale-snapshot");
        continue;
      }
      if (current && directive.action == RevisionAction::add_declaration) {
        result.skipped.emplace_back(directive, "stale-snapshot");
        continue;
      }
    } else {
      if (!current) {
        result.skipped.emplace_back(directive, "stale-snapshot");
        continue;
      }
      if (file_digest(*current) != directive.expected_file_digest) {
        result.skipped.emplace_back(directive, "stale-snapshot");
        continue;
      }
    }

    if (directive.action == RevisionAction::add_declaration) {
      std::string content = current.value_or("");
      bool present = false;
      for (const auto& raw : split(content, '\n')) {
        std::string t = trim(raw);
        size_t i = 0;
        while (i < t.size() &&
               (std::isalnum(static_cast<unsigned char>(t[i])) || t[i] == '_' || t[i] == '-' ||
                t[i] == '.')) {
          ++i;
        }
        if (i > 0 && normalize_package_name(t.substr(0, i)) == directive.package) {
          present = true;
          break;
        }
      }
      if (present) {
        result.applied.push_back(directive);
        continue;
      }
      if (!content.empty() && content.back() != '\n') content += '\n';
      content += directive.package;
      if (directive.constraint) content += *directive.constraint;
      content += '\n';
      if (!write_file_atomic(path, content)) {
        result.skipped.emplace_back(directive, "io-failure");
        continue;
      }
      result.applied.push_back(directive);
      continue;
    }

    // rewrite-import
    auto lines = split(*current, '\n');
    bool changed = false;
    for (int lineno : directive.lines) {
      if (lineno < 1 || static_cast<size_t>(lineno) > lines.size()) continue;
      changed |= replace_dotted(lines[lineno - 1], directive.old_target, directive.new_target);
    }
    if (!changed) {
      result.skipped.emplace_back(directive, "target-not-found");
      continue;
    }
    if (!write_file_atomic(path, join(lines, "\n"))) {
      result.skipped.emplace_back(directive, "io-failure");
      continue;
    }
    result.applied.push_back(directive);
  }
  return result;
}

bool ExternalReviser::revise(const fs::path& workspace, const RevisionPlan& plan,
                             const std::vector<EvidenceRecord>& evidence,
                             const ExternalEnvGraph& g_ext, const RepoDependencyGraph& g_int,
                             std::vector<std::string>* warnings) const {
  nlohmann::json request;
  request["workspace"] = workspace.string();
  request["plan"] = plan.to_json();
  request["evidence"] = nlohmann::json::array();
  for (const auto& rec : evidence) request["evidence"].push_back(rec.to_json());
  request["g_ext"] = g_ext.to_json();
  request["g_int"] = g_int.to_json();

  auto result = run_command(cmd.argv, request.dump(), timeout_seconds, workspace);
  if (result.timed_out) {
    if (warnings) warnings->push_back("external reviser timed out");
    return false;
  }
  if (!result.exit_code || *result.exit_code != 0) {
    if (warnings) warnings->push_back("external reviser exited nonzero");
    return false;
  }
  return true;
}

}  // namespace envalign
