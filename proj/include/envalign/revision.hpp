#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "envalign/attribution.hpp"
#include "envalign/repo_model.hpp"

namespace envalign {

enum class RevisionAction {
  add_declaration,
  rewrite_import,
  create_package_initializer,
  delegate_to_reviser
};

const char* to_string(RevisionAction action);

struct RevisionDirective {
  RevisionAction action = RevisionAction::delegate_to_reviser;
  std::string target_file;  // manifest for add-declaration, source file otherwise

  // add-declaration
  std::string package;
  std::optional<std::string> constraint;
  // rewrite-import
  std::string old_target;
  std::string new_target;
  std::vector<int> lines;
  // create-package-initializer
  std::string directory;
  // delegate-to-reviser
  AttributionSource focus = AttributionSource::pass;
  std::vector<int> evidence_indices;
  std::vector<std::string> node_ids;
  std::string instruction;

  // content digest of target_file at planning time; empty when the file is
  // expected to be absent
  std::string expected_file_digest;

  nlohmann::json to_json() const;
};

struct RevisionPlan {
  AttributionVerdict verdict;
  std::vector<RevisionDirective> directives;

  nlohmann::json to_json() const;
};

struct ApplyResult {
  std::vector<RevisionDirective> applied;
  std::vector<std::pair<RevisionDirective, std::string>> skipped;  // directive, reason

  nlohmann::json to_json() const;
};

// Plan is never empty for a non-pass verdict; degenerates to a single
// delegate directive when nothing mechanical applies.
RevisionPlan plan_revision(const AttributionVerdict& verdict, const ExternalEnvGraph& g_ext,
                           const RepoDependencyGraph& g_int,
                           const std::vector<EvidenceRecord>& evidence,
                           const RepoSnapshot& snapshot);

ApplyResult apply_mechanical(const RevisionPlan& plan, const std::filesystem::path& workspace);

// Pluggable reviser: JSON {workspace, plan, evidence, g_ext, g_int} on stdin,
// edits the workspace in place, exit 0 on success. The loop rescans afterwards.
struct ExternalReviser {
  CommandTemplate cmd;
  double timeout_seconds = 120.0;

  // Returns true when the reviser exited 0.
  bool revise(const std::filesystem::path& workspace, const RevisionPlan& plan,
              const std::vector<EvidenceRecord>& evidence, const ExternalEnvGraph& g_ext,
              const RepoDependencyGraph& g_int, std::vector<std::string>* warnings = nullptr) const;
};

}  // namespace envalign
