#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "envalign/executor.hpp"
#include "envalign/ext_graph.hpp"
#include "envalign/int_graph.hpp"

namespace envalign {

enum class EvidenceKind {
  dependency_install_failure,
  missing_module,
  missing_symbol,
  parse_failure,
  test_assertion_failure,
  runtime_exception_other,
  timeout,
  nonzero_exit_other
};

enum class OriginHint { external, internal, unknown };
enum class Confidence { certain, heuristic };

const char* to_string(EvidenceKind kind);
const char* to_string(OriginHint hint);
const char* to_string(Confidence confidence);

std::optional<EvidenceKind> evidence_kind_from_string(const std::string& name);
std::optional<OriginHint> origin_hint_from_string(const std::string& name);

struct StackFrame {
  std::string file;
  int line = 1;
  std::string scope;  // "<module>" for module level
  bool in_repo = false;
};

inline constexpr std::size_t kExcerptCap = 2048;

struct EvidenceRecord {
  Phase phase = Phase::install;
  EvidenceKind kind = EvidenceKind::nonzero_exit_other;
  std::optional<std::string> subject;  // package / module / symbol name
  OriginHint origin_hint = OriginHint::unknown;
  std::optional<std::string> file;
  std::optional<int> line;
  std::vector<StackFrame> frames;
  std::string excerpt;  // verbatim substring of the raw log, <= 2 KiB
  Confidence confidence = Confidence::certain;
  int occurrences = 1;

  nlohmann::json to_json() const;
};

std::vector<StackFrame> parse_stack_trace(const std::string& stderr_text,
                                          const std::filesystem::path& workspace);

// Rule-based normalization of raw logs into the fixed evidence schema.
// Empty result iff pass_exec(logs) is true.
std::vector<EvidenceRecord> normalize(const std::vector<RawExecutionLog>& logs,
                                      const ExternalEnvGraph& g_ext,
                                      const RepoDependencyGraph& g_int,
                                      const std::filesystem::path& workspace = {});

// Schema validation for records coming back from an external normalizer.
bool validate_record(const EvidenceRecord& record, const std::vector<RawExecutionLog>& logs,
                     const RepoDependencyGraph& g_int, std::string* reason = nullptr);

// Pluggable external normalizer: JSON {logs, g_ext, g_int} on stdin, JSON
// array of records on stdout. Falls back to the rule-based path on process
// failure; invalid records are dropped with a warning.
struct ExternalNormalizer {
  CommandTemplate cmd;
  double timeout_seconds = 120.0;

  std::vector<EvidenceRecord> normalize(const std::vector<RawExecutionLog>& logs,
                                        const ExternalEnvGraph& g_ext,
                                        const RepoDependencyGraph& g_int,
                                        const std::filesystem::path& workspace,
                                        std::vector<std::string>* warnings = nullptr) const;
};

nlohmann::json log_to_json(const RawExecutionLog& log);
std::optional<EvidenceRecord> record_from_json(const nlohmann::json& j, std::string* reason);

}  // namespace envalign
