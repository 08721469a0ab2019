#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "envalign/attribution.hpp"
#include "envalign/evidence.hpp"
#include "envalign/executor.hpp"
#include "envalign/ext_graph.hpp"
#include "envalign/int_graph.hpp"
#include "envalign/repo_model.hpp"
#include "envalign/revision.hpp"

namespace envalign {

// Snapshot plus both graphs, rebuilt in full at the top of every iteration.
struct EnvState {
  RepoSnapshot snapshot;
  std::map<std::string, FileExtraction> extractions;
  ExternalEnvGraph g_ext;
  RepoDependencyGraph g_int;
};

EnvState build_env(const std::filesystem::path& workspace, const ScanConfig& scan,
                   const std::set<std::string>& stdlib,
                   const std::map<std::string, std::string>& aliases = {});

struct LoopConfig {
  int budget = 4;
  ExecConfig exec;
  ScanConfig scan;
  std::optional<CommandTemplate> normalizer_cmd;  // rule-based when absent
  std::optional<CommandTemplate> reviser_cmd;
  std::optional<std::filesystem::path> report_path;
  std::set<std::string> stdlib;  // defaults applied when empty
  std::map<std::string, std::string> aliases;
  double tool_timeout_seconds = 120.0;  // normalizer / reviser subprocesses
};

struct IterationRecord {
  int index = 1;  // 1-based
  std::string snapshot_digest;
  std::string g_ext_digest;
  std::string g_int_digest;
  std::vector<RawExecutionLog> logs;
  std::vector<EvidenceRecord> evidence;
  AttributionVerdict verdict;
  std::optional<RevisionPlan> plan;
  std::optional<ApplyResult> apply_result;
  bool reviser_invoked = false;
  bool reviser_succeeded = false;
  std::vector<std::string> warnings;
};

enum class LoopOutcome { success, budget_exhausted };

const char* to_string(LoopOutcome outcome);

struct AlignmentRunReport {
  std::vector<IterationRecord> iterations;
  LoopOutcome outcome = LoopOutcome::budget_exhausted;
  std::string final_digest;
  bool aborted = false;
  std::string abort_reason;

  nlohmann::json to_json() const;
};

struct WorkspaceError : std::runtime_error {
  explicit WorkspaceError(const std::string& what) : std::runtime_error(what) {}
};

AlignmentRunReport align(const std::filesystem::path& workspace, const LoopConfig& config);

struct IoFailure : std::runtime_error {
  explicit IoFailure(const std::string& what) : std::runtime_error(what) {}
};

// Canonical JSON, stable key order, no timestamps.
void write_report(const AlignmentRunReport& report, const std::filesystem::path& path);

}  // namespace envalign
