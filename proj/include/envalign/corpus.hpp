#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "envalign/align_loop.hpp"
#include "envalign/attribution.hpp"

namespace envalign {

enum class FaultKind {
  remove_declaration,
  rename_internal_module,
  break_internal_import,
  delete_symbol,
  inject_syntax_error,
  inject_logic_fault
};

const char* to_string(FaultKind kind);
std::optional<FaultKind> fault_kind_from_string(const std::string& name);

AttributionSource ground_truth_for(FaultKind kind);

struct FaultSpec {
  FaultKind kind = FaultKind::remove_declaration;
  std::uint64_t seed = 0;
  std::optional<std::string> target;  // path or name actually mutated
};

struct CorpusCase {
  std::filesystem::path dir;
  FaultSpec fault;
  AttributionSource ground_truth = AttributionSource::external_dependency;
  std::string base_template;
};

struct TemplateBroken : std::runtime_error {
  explicit TemplateBroken(const std::string& what) : std::runtime_error(what) {}
};

// Bundled known-passing template repositories.
std::vector<std::string> builtin_template_names();
void write_template(const std::string& name, const std::filesystem::path& dir);

// Offline execution harness (launcher, declaration checker, stub package
// index) written under `dir`.
void write_harness(const std::filesystem::path& dir);

// Exec commands wired to a harness written at `harness_dir`.
ExecConfig harness_exec_config(const std::filesystem::path& harness_dir,
                               double timeout_seconds = 30.0);

// The bundled Client example repository.
void write_client_fixture(const std::filesystem::path& dir);

std::vector<CorpusCase> generate_corpus(const std::filesystem::path& out_dir, int count,
                                        std::uint64_t seed,
                                        const std::vector<std::string>& templates);

std::vector<CorpusCase> load_corpus(const std::filesystem::path& corpus_dir);

struct AccuracyReport {
  std::map<std::string, std::pair<int, int>> per_label;  // label -> (correct, total)
  std::optional<double> overall;                         // absent for an empty corpus
  // rows = ground truth, cols = predicted; order: external, internal, residual
  int confusion[3][3] = {};
  std::vector<std::string> errors;

  nlohmann::json to_json() const;
};

AccuracyReport evaluate_attribution(const std::filesystem::path& corpus_dir,
                                    const LoopConfig& config);

}  // namespace envalign
