#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace envalign {

struct SubprocessResult {
  std::optional<int> exit_code;  // absent on timeout
  bool timed_out = false;
  std::string stdout_text;
  std::string stderr_text;
};

// Runs a local command feeding `stdin_data`, capturing both streams.
// Used by the pluggable normalizer/reviser contracts; inherits the caller's
// environment.
SubprocessResult run_command(const std::vector<std::string>& argv, const std::string& stdin_data,
                             double timeout_seconds,
                             const std::optional<std::filesystem::path>& cwd = std::nullopt);

}  // namespace envalign
