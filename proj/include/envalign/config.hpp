#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "envalign/align_loop.hpp"

namespace envalign {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Aggregated tool configuration. Loaded from a flat JSON key-value file
// (dotted keys, no nesting); every field has a working default so the tool
// runs with no config file at all.
struct ToolConfig {
  ScanConfig scan;
  ExecConfig exec;
  int budget = 4;
  std::optional<CommandTemplate> normalizer_cmd;
  std::optional<CommandTemplate> reviser_cmd;
  std::optional<std::filesystem::path> report_path;
  double tool_timeout_seconds = 120.0;
  std::optional<std::filesystem::path> stdlib_override;  // newline-separated names
  std::optional<std::filesystem::path> alias_table;      // flat JSON {import: package}

  // Resolves stdlib_override / alias_table file contents.
  LoopConfig to_loop_config() const;
};

// Parses the flat key-value document; unknown keys are rejected.
ToolConfig parse_tool_config(const std::string& text, const std::string& origin);

// Loads `explicit_path` if given, else the ENVALIGN_CONFIG environment
// variable if set, else returns defaults.
ToolConfig load_tool_config(const std::optional<std::filesystem::path>& explicit_path);

}  // namespace envalign
