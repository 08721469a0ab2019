#include "envalign/config.hpp"

#include <cstdlib>
#include <set>

#include <nlohmann/json.hpp>

#include "envalign/util.hpp"

namespace envalign {

namespace {

std::vector<std::string> string_list(const nlohmann::json& value, const std::string& key) {
  std::vector<std::string> out;
  if (value.is_string()) {
    out.push_back(value.get<std::string>());
    return out;
  }
  if (!value.is_array()) throw ConfigError("key '" + key + "' expects a string or string array");
  for (const auto& item : value) {
    if (!item.is_string()) throw ConfigError("key '" + key + "' expects string elements");
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::set<std::string> string_set(const nlohmann::json& value, const std::string& key) {
  auto list = string_list(value, key);
  return {list.begin(), list.end()};
}

CommandTemplate command(const nlohmann::json& value, const std::string& key) {
  CommandTemplate cmd{string_list(value, key)};
  if (cmd.argv.empty()) throw ConfigError("key '" + key + "' expects a non-empty command");
  return cmd;
}

double number(const nlohmann::json& value, const std::string& key) {
  if (!value.is_number()) throw ConfigError("key '" + key + "' expects a number");
  return value.get<double>();
}

bool boolean(const nlohmann::json& value, const std::string& key) {
  if (!value.is_boolean()) throw ConfigError("key '" + key + "' expects a boolean");
  return value.get<bool>();
}

std::string str(const nlohmann::json& value, const std::string& key) {
  if (!value.is_string()) throw ConfigError("key '" + key + "' expects a string");
  return value.get<std::string>();
}

}  // namespace

ToolConfig parse_tool_config(const std::string& text, const std::string& origin) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config is not valid JSON: " + origin);
  if (!doc.is_object()) throw ConfigError("config must be a flat JSON object: " + origin);

  ToolConfig config;
  for (const auto& [key, value] : doc.items()) {
    if (value.is_object()) {
      throw ConfigError("config must be flat; nested value at key '" + key + "'");
    }
    if (key == "scan.source_extensions") {
      config.scan.source_extensions = string_set(value, key);
    } else if (key == "scan.manifest_names") {
      config.scan.manifest_names = string_set(value, key);
    } else if (key == "scan.ignore_dirs") {
      config.scan.ignore_dirs = string_set(value, key);
    } else if (key == "scan.include_hidden") {
      config.scan.include_hidden = boolean(value, key);
    } else if (key == "exec.install_cmd") {
      config.exec.install_cmd = command(value, key);
    } else if (key == "exec.launch_cmd") {
      config.exec.launch_cmd = command(value, key);
    } else if (key == "exec.test_cmd") {
      config.exec.test_cmd = command(value, key);
    } else if (key == "exec.timeout_seconds") {
      config.exec.timeout_seconds = number(value, key);
    } else if (key == "exec.stream_cap") {
      config.exec.stream_cap = static_cast<std::size_t>(number(value, key));
    } else if (key == "exec.env_allowlist") {
      config.exec.env_allowlist = string_list(value, key);
    } else if (key == "exec.copy_to_temp") {
      config.exec.workspace_policy =
          boolean(value, key) ? WorkspacePolicy::copy_to_temp : WorkspacePolicy::in_place;
    } else if (key == "loop.budget") {
      config.budget = static_cast<int>(number(value, key));
      if (config.budget < 1) throw ConfigError("key 'loop.budget' must be positive");
    } else if (key == "loop.normalizer_cmd") {
      config.normalizer_cmd = command(value, key);
    } else if (key == "loop.reviser_cmd") {
      config.reviser_cmd = command(value, key);
    } else if (key == "loop.report_path") {
      config.report_path = str(value, key);
    } else if (key == "loop.tool_timeout_seconds") {
      config.tool_timeout_seconds = number(value, key);
    } else if (key == "stdlib_override") {
      config.stdlib_override = str(value, key);
    } else if (key == "alias_table") {
      config.alias_table = str(value, key);
    } else {
      throw ConfigError("unknown config key '" + key + "' in " + origin);
    }
  }
  return config;
}

ToolConfig load_tool_config(const std::optional<std::filesystem::path>& explicit_path) {
  std::optional<std::filesystem::path> path = explicit_path;
  if (!path) {
    if (const char* env = std::getenv("ENVALIGN_CONFIG"); env && *env) path = env;
  }
  if (!path) return ToolConfig{};
  auto text = read_file(*path);
  if (!text) throw ConfigError("cannot read config file: " + path->string());
  return parse_tool_config(*text, path->string());
}

LoopConfig ToolConfig::to_loop_config() const {
  LoopConfig loop;
  loop.budget = budget;
  loop.exec = exec;
  loop.scan = scan;
  loop.normalizer_cmd = normalizer_cmd;
  loop.reviser_cmd = reviser_cmd;
  loop.report_path = report_path;
  loop.tool_timeout_seconds = tool_timeout_seconds;

  if (stdlib_override) {
    auto text = read_file(*stdlib_override);
    if (!text) throw ConfigError("cannot read stdlib override: " + stdlib_override->string());
    for (const auto& raw : split(*text, '\n')) {
      std::string name = trim(raw);
      if (!name.empty() && name[0] != '#') loop.stdlib.insert(name);
    }
    if (loop.stdlib.empty()) {
      throw ConfigError("stdlib override lists no names: " + stdlib_override->string());
    }
  }
  if (alias_table) {
    auto text = read_file(*alias_table);
    if (!text) throw ConfigError("cannot read alias table: " + alias_table->string());
    nlohmann::json doc = nlohmann::json::parse(*text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw ConfigError("alias table must be a flat JSON object: " + alias_table->string());
    }
    for (const auto& [import_name, package] : doc.items()) {
      if (!package.is_string()) {
        throw ConfigError("alias table values must be strings: " + alias_table->string());
      }
      loop.aliases[import_name] = package.get<std::string>();
    }
  }
  return loop;
}

}  // namespace envalign
