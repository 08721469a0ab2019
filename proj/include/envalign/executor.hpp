#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace envalign {

enum class Phase { install, launch, test };

const char* to_string(Phase phase);

// argv list; "{root}" expands to the workspace path in any argument.
struct CommandTemplate {
  std::vector<std::string> argv;
};

enum class WorkspacePolicy { in_place, copy_to_temp };

struct ExecConfig {
  std::optional<CommandTemplate> install_cmd;
  std::optional<CommandTemplate> launch_cmd;
  std::optional<CommandTemplate> test_cmd;
  double timeout_seconds = 120.0;  // per phase
  std::vector<std::string> env_allowlist{"PATH", "HOME", "LANG", "LC_ALL", "TMPDIR"};
  WorkspacePolicy workspace_policy = WorkspacePolicy::in_place;
  std::size_t stream_cap = 256 * 1024;  // per stream; tail kept on truncation

  const std::optional<CommandTemplate>& command_for(Phase phase) const;
};

struct RawExecutionLog {
  Phase phase = Phase::install;
  std::optional<int> exit_code;  // absent on timeout
  bool timed_out = false;
  std::string stdout_text;
  std::string stderr_text;
  bool stdout_truncated = false;
  bool stderr_truncated = false;
  double duration_seconds = 0.0;
};

RawExecutionLog run_phase(const std::filesystem::path& workspace, Phase phase,
                          const ExecConfig& config);

// install -> launch -> test, stopping after the first failing phase.
std::vector<RawExecutionLog> run_all(const std::filesystem::path& workspace,
                                     const ExecConfig& config);

bool pass_exec(const std::vector<RawExecutionLog>& logs);

}  // namespace envalign
