// envalign: repository environment alignment tool.
//
// Exit codes: 0 pass/success, 1 tool error, 2 budget exhausted,
// 3 non-pass attribution verdict.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "envalign/align_loop.hpp"
#include "envalign/config.hpp"
#include "envalign/corpus.hpp"
#include "envalign/stdlib_names.hpp"
#include "envalign/util.hpp"

namespace fs = std::filesystem;
using namespace envalign;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitBudget = 2;
constexpr int kExitNonPass = 3;

void emit(const nlohmann::json& j, const std::optional<fs::path>& out) {
  std::string text = j.dump(2) + "\n";
  if (out) {
    if (!write_file_atomic(*out, text)) {
      throw IoFailure("cannot write output: " + out->string());
    }
  } else {
    std::cout << text;
  }
}

struct CliFlags {
  std::optional<fs::path> config_path;
  std::vector<std::string> install_cmd;
  std::vector<std::string> launch_cmd;
  std::vector<std::string> test_cmd;
  std::optional<fs::path> harness_dir;
  std::optional<double> timeout;
  std::optional<int> budget;
  std::vector<std::string> normalizer_cmd;
  std::vector<std::string> reviser_cmd;
  std::optional<fs::path> report_path;
};

void add_exec_flags(CLI::App* cmd, CliFlags& flags) {
  cmd->add_option("--install-cmd", flags.install_cmd,
                  "Install phase argv ({root} expands to the repo path)");
  cmd->add_option("--launch-cmd", flags.launch_cmd, "Launch phase argv");
  cmd->add_option("--test-cmd", flags.test_cmd, "Test phase argv");
  cmd->add_option("--harness", flags.harness_dir,
                  "Use the bundled offline harness written at this directory "
                  "for all three phases");
  cmd->add_option("--timeout", flags.timeout, "Per-phase timeout in seconds");
}

// flags > config file > defaults
LoopConfig effective_loop_config(const CliFlags& flags) {
  ToolConfig tool = load_tool_config(flags.config_path);
  LoopConfig loop = tool.to_loop_config();
  if (flags.harness_dir) {
    double timeout = flags.timeout.value_or(loop.exec.timeout_seconds);
    ExecConfig harness = harness_exec_config(*flags.harness_dir, timeout);
    loop.exec.install_cmd = harness.install_cmd;
    loop.exec.launch_cmd = harness.launch_cmd;
    loop.exec.test_cmd = harness.test_cmd;
  }
  if (!flags.install_cmd.empty()) loop.exec.install_cmd = CommandTemplate{flags.install_cmd};
  if (!flags.launch_cmd.empty()) loop.exec.launch_cmd = CommandTemplate{flags.launch_cmd};
  if (!flags.test_cmd.empty()) loop.exec.test_cmd = CommandTemplate{flags.test_cmd};
  if (flags.timeout) loop.exec.timeout_seconds = *flags.timeout;
  if (flags.budget) loop.budget = *flags.budget;
  if (!flags.normalizer_cmd.empty()) loop.normalizer_cmd = CommandTemplate{flags.normalizer_cmd};
  if (!flags.reviser_cmd.empty()) loop.reviser_cmd = CommandTemplate{flags.reviser_cmd};
  if (flags.report_path) loop.report_path = *flags.report_path;
  return loop;
}

int cmd_graph(const std::string& sub, const fs::path& repo, const std::optional<fs::path>& out,
              const CliFlags& flags) {
  LoopConfig loop = effective_loop_config(flags);
  const std::set<std::string>& stdlib =
      loop.stdlib.empty() ? default_stdlib_names() : loop.stdlib;
  EnvState env = build_env(repo, loop.scan, stdlib, loop.aliases);
  emit(sub == "ext" ? env.g_ext.to_json() : env.g_int.to_json(), out);
  return kExitOk;
}

int cmd_attribute(const fs::path& repo, const CliFlags& flags) {
  LoopConfig loop = effective_loop_config(flags);
  const std::set<std::string>& stdlib =
      loop.stdlib.empty() ? default_stdlib_names() : loop.stdlib;
  EnvState env = build_env(repo, loop.scan, stdlib, loop.aliases);
  std::vector<RawExecutionLog> logs = run_all(repo, loop.exec);
  std::vector<EvidenceRecord> evidence = normalize(logs, env.g_ext, env.g_int, repo);

  AttributionVerdict verdict;
  if (pass_exec(logs)) {
    verdict.source = AttributionSource::pass;
  } else {
    verdict = attribute(env.g_ext, env.g_int, evidence);
  }
  nlohmann::json j;
  j["verdict"] = verdict.to_json();
  j["evidence"] = nlohmann::json::array();
  for (const auto& rec : evidence) j["evidence"].push_back(rec.to_json());
  emit(j, std::nullopt);
  std::cerr << "verdict: " << to_string(verdict.source) << "\n";
  return verdict.source == AttributionSource::pass ? kExitOk : kExitNonPass;
}

int cmd_align(const fs::path& repo, const CliFlags& flags) {
  LoopConfig loop = effective_loop_config(flags);
  AlignmentRunReport report = align(repo, loop);
  if (loop.report_path) write_report(report, *loop.report_path);
  emit(report.to_json(), std::nullopt);
  std::cerr << "outcome: " << to_string(report.outcome) << " after "
            << report.iterations.size() << " iteration(s)\n";
  if (report.aborted) {
    std::cerr << "aborted: " << report.abort_reason << "\n";
    return kExitError;
  }
  return report.outcome == LoopOutcome::success ? kExitOk : kExitBudget;
}

int cmd_corpus_gen(const fs::path& out_dir, int count, std::uint64_t seed,
                   const std::vector<std::string>& templates) {
  std::vector<CorpusCase> cases = generate_corpus(out_dir, count, seed, templates);
  nlohmann::json j;
  j["cases"] = cases.size();
  j["dir"] = out_dir.string();
  emit(j, std::nullopt);
  std::cerr << "generated " << cases.size() << " case(s) in " << out_dir.string() << "\n";
  return kExitOk;
}

int cmd_corpus_eval(const fs::path& corpus_dir, const CliFlags& flags) {
  AccuracyReport report;
  if (fs::exists(corpus_dir / "manifest.json")) {
    report = evaluate_attribution(corpus_dir, effective_loop_config(flags));
  }
  nlohmann::json j = report.to_json();
  if (!report.overall) j["status"] = "not-applicable";
  emit(j, std::nullopt);
  if (report.overall) {
    std::cerr << "overall accuracy: " << *report.overall << "\n";
  } else {
    std::cerr << "empty corpus: accuracy not applicable\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"envalign: align a repository with its execution environment"};
  app.require_subcommand(1);
  CliFlags flags;
  app.add_option("--config", flags.config_path,
                 "Flat JSON config file (default: $ENVALIGN_CONFIG)");

  // graph ext|int
  auto* graph = app.add_subcommand("graph", "Emit an environment graph as canonical JSON");
  graph->require_subcommand(1);
  fs::path graph_repo;
  std::optional<fs::path> graph_out;
  auto* graph_ext = graph->add_subcommand("ext", "External environment graph");
  auto* graph_int = graph->add_subcommand("int", "Repository dependency graph");
  for (auto* sub : {graph_ext, graph_int}) {
    sub->add_option("repo", graph_repo, "Repository root")->required();
    sub->add_option("--out", graph_out, "Write JSON here instead of standard output");
  }

  // attribute
  auto* attribute_cmd =
      app.add_subcommand("attribute", "Run one execution pass and attribute the failure");
  fs::path attribute_repo;
  attribute_cmd->add_option("repo", attribute_repo, "Repository root")->required();
  add_exec_flags(attribute_cmd, flags);

  // align
  auto* align_cmd = app.add_subcommand("align", "Run the iterative alignment loop");
  fs::path align_repo;
  align_cmd->add_option("repo", align_repo, "Repository root")->required();
  add_exec_flags(align_cmd, flags);
  align_cmd->add_option("--budget", flags.budget, "Iteration budget (default 4)");
  align_cmd->add_option("--normalizer", flags.normalizer_cmd,
                        "External normalizer argv (default: rule-based)");
  align_cmd->add_option("--reviser", flags.reviser_cmd, "External reviser argv");
  align_cmd->add_option("--report", flags.report_path, "Write the run report here");

  // corpus gen|eval
  auto* corpus = app.add_subcommand("corpus", "Fault-injection corpus generation and scoring");
  corpus->require_subcommand(1);
  auto* corpus_gen = corpus->add_subcommand("gen", "Generate a labeled broken-repository corpus");
  fs::path corpus_dir;
  int corpus_count = 50;
  std::uint64_t corpus_seed = 7;
  std::vector<std::string> corpus_templates;
  corpus_gen->add_option("dir", corpus_dir, "Output directory")->required();
  corpus_gen->add_option("--count", corpus_count, "Number of cases (default 50)");
  corpus_gen->add_option("--seed", corpus_seed, "Generator seed (default 7)");
  corpus_gen->add_option("--template", corpus_templates,
                         "Template names (default: all bundled templates)");
  auto* corpus_eval =
      corpus->add_subcommand("eval", "Score attribution accuracy against ground truth");
  corpus_eval->add_option("dir", corpus_dir, "Corpus directory")->required();
  add_exec_flags(corpus_eval, flags);

  // fixture / harness export
  auto* fixture_cmd =
      app.add_subcommand("fixture", "Write the bundled client example repository");
  fs::path fixture_dir;
  fixture_cmd->add_option("dir", fixture_dir, "Destination directory")->required();
  auto* harness_cmd =
      app.add_subcommand("harness", "Write the bundled offline execution harness");
  fs::path harness_dir;
  harness_cmd->add_option("dir", harness_dir, "Destination directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (graph_ext->parsed()) return cmd_graph("ext", graph_repo, graph_out, flags);
    if (graph_int->parsed()) return cmd_graph("int", graph_repo, graph_out, flags);
    if (attribute_cmd->parsed()) return cmd_attribute(attribute_repo, flags);
    if (align_cmd->parsed()) return cmd_align(align_repo, flags);
    if (corpus_gen->parsed())
      return cmd_corpus_gen(corpus_dir, corpus_count, corpus_seed, corpus_templates);
    if (corpus_eval->parsed()) return cmd_corpus_eval(corpus_dir, flags);
    if (fixture_cmd->parsed()) {
      write_client_fixture(fixture_dir);
      std::cerr << "wrote client fixture to " << fixture_dir.string() << "\n";
      return kExitOk;
    }
    if (harness_cmd->parsed()) {
      write_harness(harness_dir);
      std::cerr << "wrote harness to " << harness_dir.string() << "\n";
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  std::cerr << "error: no command\n";
  return kExitError;
}
