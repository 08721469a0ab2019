#include "envalign/align_loop.hpp"

#include "envalign/stdlib_names.hpp"
#include "envalign/util.hpp"

namespace envalign {

namespace fs = std::filesystem;

const char* to_string(LoopOutcome outcome) {
  return outcome == LoopOutcome::success ? "success" : "budget-exhausted";
}

EnvState build_env(const fs::path& workspace, const ScanConfig& scan,
                   const std::set<std::string>& stdlib,
                   const std::map<std::string, std::string>& aliases) {
  EnvState state;
  state.snapshot = scan_repository(workspace, scan);

  std::map<std::string, std::vector<ImportRecord>> imports;
  std::vector<DeclaredDependency> declarations;

  for (const auto& file : state.snapshot.files) {
    if (file.role == FileRole::manifest && file.text) {
      for (auto& dep : parse_manifest(file)) declarations.push_back(std::move(dep));
      continue;
    }
    if (file.role != FileRole::source || !file.text) continue;
    std::string module;
    try {
      module = derive_module_name(file.rel_path);
    } catch (const InvalidSourcePath&) {
    }
    auto extraction = extract_file(*file.text, file.rel_path, module);
    if (!extraction.failure) imports[file.rel_path] = extraction.imports;
    state.extractions[file.rel_path] = std::move(extraction);
  }

  state.g_ext = build_ext_graph(state.snapshot, imports, declarations, stdlib, aliases);

  std::set<std::string> internal_modules;
  for (const auto& file : state.snapshot.files) {
    if (file.role != FileRole::source) continue;
    try {
      std::string mod = derive_module_name(file.rel_path);
      if (!mod.empty()) internal_modules.insert(mod);
    } catch (const InvalidSourcePath&) {
    }
  }
  ImportClassifier classify = [internal_modules, &stdlib](const ImportRecord& imp) {
    return resolve_import_target(imp, internal_modules, stdlib);
  };
  state.g_int = build_int_graph(state.snapshot, state.extractions, classify);
  return state;
}

namespace {

nlohmann::json iteration_to_json(const IterationRecord& it) {
  nlohmann::json j;
  j["index"] = it.index;
  j["snapshot_digest"] = it.snapshot_digest;
  j["g_ext_digest"] = it.g_ext_digest;
  j["g_int_digest"] = it.g_int_digest;
  j["logs"] = nlohmann::json::array();
  for (const auto& log : it.logs) j["logs"].push_back(log_to_json(log));
  j["evidence"] = nlohmann::json::array();
  for (const auto& rec : it.evidence) j["evidence"].push_back(rec.to_json());
  j["verdict"] = it.verdict.to_json();
  if (it.plan) j["plan"] = it.plan->to_json();
  if (it.apply_result) j["apply_result"] = it.apply_result->to_json();
  if (it.reviser_invoked) j["reviser_succeeded"] = it.reviser_succeeded;
  if (!it.warnings.empty()) j["warnings"] = it.warnings;
  return j;
}

std::string graph_digest(const nlohmann::json& j) { return to_hex(fnv1a(j.dump())); }

}  // namespace

nlohmann::json AlignmentRunReport::to_json() const {
  nlohmann::json j;
  j["iterations"] = nlohmann::json::array();
  for (const auto& it : iterations) j["iterations"].push_back(iteration_to_json(it));
  j["outcome"] = to_string(outcome);
  j["final_digest"] = final_digest;
  if (aborted) {
    j["aborted"] = true;
    j["abort_reason"] = abort_reason;
  }
  return j;
}

AlignmentRunReport align(const fs::path& workspace, const LoopConfig& config) {
  AlignmentRunReport report;
  const std::set<std::string>& stdlib =
      config.stdlib.empty() ? default_stdlib_names() : config.stdlib;

  if (!fs::is_directory(workspace)) {
    report.aborted = true;
    report.abort_reason = "workspace is not a directory: " + workspace.string();
    return report;
  }

  int budget = config.budget < 1 ? 1 : config.budget;
  for (int t = 1; t <= budget; ++t) {
    IterationRecord iter;
    iter.index = t;
    try {
      EnvState env = build_env(workspace, config.scan, stdlib, config.aliases);
      iter.snapshot_digest = env.snapshot.digest;
      iter.g_ext_digest = graph_digest(env.g_ext.to_json());
      iter.g_int_digest = graph_digest(env.g_int.to_json());

      iter.logs = run_all(workspace, config.exec);
      if (config.normalizer_cmd) {
        ExternalNormalizer normalizer{*config.normalizer_cmd, config.tool_timeout_seconds};
        iter.evidence =
            normalizer.normalize(iter.logs, env.g_ext, env.g_int, workspace, &iter.warnings);
      } else {
        iter.evidence = normalize(iter.logs, env.g_ext, env.g_int, workspace);
      }

      if (pass_exec(iter.logs)) {
        iter.verdict.source = AttributionSource::pass;
        report.iterations.push_back(std::move(iter));
        report.outcome = LoopOutcome::success;
        report.final_digest = env.snapshot.digest;
        return report;
      }

      iter.verdict = attribute(env.g_ext, env.g_int, iter.evidence);
      auto plan = plan_revision(iter.verdict, env.g_ext, env.g_int, iter.evidence, env.snapshot);
      iter.apply_result = apply_mechanical(plan, workspace);

      bool has_delegation = false;
      for (const auto& d : plan.directives) {
        if (d.action == RevisionAction::delegate_to_reviser) has_delegation = true;
      }
      if (has_delegation && config.reviser_cmd) {
        ExternalReviser reviser{*config.reviser_cmd, config.tool_timeout_seconds};
        iter.reviser_invoked = true;
        iter.reviser_succeeded = reviser.revise(workspace, plan, iter.evidence, env.g_ext,
                                                env.g_int, &iter.warnings);
      }
      iter.plan = std::move(plan);
      report.iterations.push_back(std::move(iter));
      report.final_digest = report.iterations.back().snapshot_digest;
    } catch (const RootNotFound& e) {
      report.aborted = true;
      report.abort_reason = e.what();
      report.iterations.push_back(std::move(iter));
      break;
    }
  }
  report.outcome = LoopOutcome::budget_exhausted;
  // final digest reflects the workspace as left by the last apply step
  try {
    report.final_digest = scan_repository(workspace, config.scan).digest;
  } catch (const RootNotFound&) {
  }
  return report;
}

void write_report(const AlignmentRunReport& report, const fs::path& path) {
  std::string text = report.to_json().dump(2);
  text += '\n';
  if (!write_file_atomic(path, text)) throw IoFailure("cannot write report: " + path.string());
}

}  // namespace envalign
