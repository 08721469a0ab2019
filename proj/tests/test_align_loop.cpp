#include <doctest.h>

#include "envalign/align_loop.hpp"
#include "envalign/corpus.hpp"
#include "envalign/stdlib_names.hpp"
#include "temp_dir.hpp"

using namespace envalign;

namespace {

struct LoopFixture {
  testing::TempDir harness;
  testing::TempDir repo;
  LoopConfig config;

  LoopFixture() {
    write_harness(harness.path);
    write_client_fixture(repo.path);
    config.exec = harness_exec_config(harness.path);
  }
};

}  // namespace

TEST_CASE("client fixture aligns in exactly three iterations") {
  LoopFixture fx;
  AlignmentRunReport report = align(fx.repo.path, fx.config);

  CHECK(report.outcome == LoopOutcome::success);
  REQUIRE(report.iterations.size() == 3);
  CHECK(report.iterations[0].verdict.source == AttributionSource::external_dependency);
  CHECK(report.iterations[1].verdict.source == AttributionSource::internal_reference);
  CHECK(report.iterations[2].verdict.source == AttributionSource::pass);

  // iteration-level subjects match the motivating narrative
  CHECK(report.iterations[0].verdict.supporting_nodes ==
        std::vector<std::string>{"pkg:requests"});
  REQUIRE_FALSE(report.iterations[1].evidence.empty());
  CHECK(report.iterations[1].evidence[0].subject == "app.client");

  // the workspace ends in the repaired state
  auto main_text = read_file(fx.repo.path / "main.py");
  REQUIRE(main_text.has_value());
  CHECK(main_text->find("from src.client import APIClient") != std::string::npos);
  auto req_text = read_file(fx.repo.path / "requirements.txt");
  CHECK(req_text == "requests\n");
}

TEST_CASE("already-passing repository terminates in one pass iteration") {
  LoopFixture fx;
  write_file_atomic(fx.repo.path / "requirements.txt", "requests\n");
  write_file_atomic(fx.repo.path / "main.py",
                    "from src.client import APIClient\nprint(APIClient('u').describe())\n");
  AlignmentRunReport report = align(fx.repo.path, fx.config);
  CHECK(report.outcome == LoopOutcome::success);
  REQUIRE(report.iterations.size() == 1);
  CHECK(report.iterations[0].verdict.source == AttributionSource::pass);
  CHECK(report.iterations[0].evidence.empty());
  CHECK_FALSE(report.iterations[0].plan.has_value());
}

TEST_CASE("budget one leaves the first repair in place and exhausts") {
  LoopFixture fx;
  fx.config.budget = 1;
  AlignmentRunReport report = align(fx.repo.path, fx.config);
  CHECK(report.outcome == LoopOutcome::budget_exhausted);
  REQUIRE(report.iterations.size() == 1);
  CHECK(report.iterations[0].verdict.source == AttributionSource::external_dependency);
  CHECK(read_file(fx.repo.path / "requirements.txt") == "requests\n");
}

TEST_CASE("undelegatable fault exhausts the budget with residual verdicts") {
  LoopFixture fx;
  // repaired imports and declarations, but the launch itself raises
  write_file_atomic(fx.repo.path / "requirements.txt", "requests\n");
  write_file_atomic(fx.repo.path / "main.py",
                    "from src.client import APIClient\nraise RuntimeError('logic fault')\n");
  AlignmentRunReport report = align(fx.repo.path, fx.config);
  CHECK(report.outcome == LoopOutcome::budget_exhausted);
  REQUIRE(report.iterations.size() == 4);
  for (const auto& it : report.iterations) {
    CHECK(it.verdict.source == AttributionSource::residual_logic);
  }
}

TEST_CASE("digest chaining links iterations to the workspace state") {
  LoopFixture fx;
  AlignmentRunReport report = align(fx.repo.path, fx.config);
  REQUIRE(report.iterations.size() == 3);
  // each repair changes the snapshot digest seen by the next iteration
  CHECK(report.iterations[0].snapshot_digest != report.iterations[1].snapshot_digest);
  CHECK(report.iterations[1].snapshot_digest != report.iterations[2].snapshot_digest);
  CHECK(report.final_digest == report.iterations.back().snapshot_digest);
  // and the recorded digest matches a fresh rescan
  CHECK(report.final_digest == scan_repository(fx.repo.path, fx.config.scan).digest);
}

TEST_CASE("verdict-plan coherence in every non-pass iteration") {
  LoopFixture fx;
  AlignmentRunReport report = align(fx.repo.path, fx.config);
  for (const auto& it : report.iterations) {
    if (it.verdict.source == AttributionSource::pass) {
      CHECK_FALSE(it.plan.has_value());
    } else {
      REQUIRE(it.plan.has_value());
      CHECK(it.plan->verdict.source == it.verdict.source);
      CHECK_FALSE(it.plan->directives.empty());
    }
  }
}

TEST_CASE("external reviser is invoked only for plans with delegation") {
  LoopFixture fx;
  write_file_atomic(fx.repo.path / "requirements.txt", "requests\n");
  write_file_atomic(fx.repo.path / "main.py",
                    "from src.client import APIClient\nassert 1 == 2\n");
  // scripted reviser repairs the known fault
  fx.config.budget = 2;
  fx.config.reviser_cmd = CommandTemplate{
      {"python3", "-c",
       "import sys\nsys.stdin.read()\n"
       "open('main.py', 'w').write("
       "'from src.client import APIClient\\nassert 1 == 1\\n')"}};
  AlignmentRunReport report = align(fx.repo.path, fx.config);
  CHECK(report.outcome == LoopOutcome::success);
  REQUIRE(report.iterations.size() == 2);
  CHECK(report.iterations[0].reviser_invoked);
  CHECK(report.iterations[0].reviser_succeeded);
  CHECK(report.iterations[1].verdict.source == AttributionSource::pass);
}

TEST_CASE("missing workspace aborts with a flagged report") {
  LoopFixture fx;
  AlignmentRunReport report = align(fx.repo.path / "nope", fx.config);
  CHECK(report.aborted);
  CHECK_FALSE(report.abort_reason.empty());
}

TEST_CASE("reports serialize canonically and round-trip") {
  LoopFixture fx;
  AlignmentRunReport report = align(fx.repo.path, fx.config);
  nlohmann::json j = report.to_json();
  CHECK(j.dump() == report.to_json().dump());

  testing::TempDir out;
  write_report(report, out.path / "report.json");
  auto text = read_file(out.path / "report.json");
  REQUIRE(text.has_value());
  nlohmann::json parsed = nlohmann::json::parse(*text);
  CHECK(parsed["outcome"] == "success");
  CHECK(parsed["iterations"].size() == 3);
}

TEST_CASE("two identical runs produce byte-identical reports") {
  // interpreter tracebacks embed absolute paths, so both runs must use the
  // same workspace location; reset the fixture in place between runs
  LoopFixture fx;
  AlignmentRunReport ra = align(fx.repo.path, fx.config);

  for (const auto& entry : std::filesystem::directory_iterator(fx.repo.path)) {
    std::filesystem::remove_all(entry.path());
  }
  write_client_fixture(fx.repo.path);
  AlignmentRunReport rb = align(fx.repo.path, fx.config);

  // wall-clock durations are the only permitted difference
  auto scrub = [](nlohmann::json j) {
    for (auto& it : j["iterations"]) {
      for (auto& log : it["logs"]) log["duration_seconds"] = 0;
    }
    return j.dump();
  };
  CHECK(scrub(ra.to_json()) == scrub(rb.to_json()));
}
