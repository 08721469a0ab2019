#include <doctest.h>

#include "envalign/align_loop.hpp"
#include "envalign/corpus.hpp"
#include "envalign/ext_graph.hpp"
#include "envalign/stdlib_names.hpp"
#include "temp_dir.hpp"

using namespace envalign;

namespace {

RepoFile manifest_file(const std::string& rel, const std::string& text) {
  RepoFile f;
  f.rel_path = rel;
  f.role = FileRole::manifest;
  f.bytes_len = text.size();
  f.text = text;
  return f;
}

ImportRecord import_of(const std::string& target, int level = 0) {
  ImportRecord imp;
  imp.importer_file = "f.py";
  imp.target = target;
  imp.relative_level = level;
  return imp;
}

}  // namespace

TEST_CASE("parse_manifest requirement lines") {
  auto deps = parse_manifest(manifest_file("requirements.txt", "requests\n"));
  REQUIRE(deps.size() == 1);
  CHECK(deps[0].package == "requests");
  CHECK_FALSE(deps[0].version_constraint.has_value());

  deps = parse_manifest(manifest_file("requirements.txt", "Flask>=2.0 # web\n"));
  REQUIRE(deps.size() == 1);
  CHECK(deps[0].package == "flask");
  CHECK(deps[0].version_constraint == ">=2.0");

  CHECK(parse_manifest(manifest_file("requirements.txt", "")).empty());
  CHECK(parse_manifest(manifest_file("requirements.txt", "# only a comment\n\n")).empty());
}

TEST_CASE("parse_manifest skips malformed lines with a warning") {
  std::vector<std::string> warnings;
  auto deps = parse_manifest(manifest_file("requirements.txt", "good\n===broken===\n"), &warnings);
  REQUIRE(deps.size() == 1);
  CHECK(deps[0].package == "good");
  CHECK_FALSE(warnings.empty());
}

TEST_CASE("parse_manifest reads pyproject dependency lists") {
  std::string text =
      "[project]\nname = \"demo\"\ndependencies = [\n  \"requests>=2\",\n  \"flask\",\n]\n";
  auto deps = parse_manifest(manifest_file("pyproject.toml", text));
  REQUIRE(deps.size() == 2);
  CHECK(deps[0].package == "requests");
  CHECK(deps[0].version_constraint == ">=2");
  CHECK(deps[1].package == "flask");
}

TEST_CASE("suffix similarity is shared trailing segments over target length") {
  CHECK(suffix_similarity("app.client", "src.client") == doctest::Approx(0.5));
  CHECK(suffix_similarity("app.client", "main") == doctest::Approx(0.0));
  CHECK(suffix_similarity("utils", "pkg.utils") == doctest::Approx(1.0));
  CHECK(suffix_similarity("x.y.z", "a") == doctest::Approx(0.0));
}

TEST_CASE("resolve_import_target rule chain") {
  std::set<std::string> internal{"main", "src", "src.client"};
  const auto& stdlib = default_stdlib_names();

  auto cls = resolve_import_target(import_of("requests"), internal, stdlib);
  CHECK(cls.kind == ImportTargetClass::Kind::external);
  CHECK(cls.package == "requests");

  CHECK(resolve_import_target(import_of("app.client"), internal, stdlib).kind ==
        ImportTargetClass::Kind::internal);
  CHECK(resolve_import_target(import_of("os"), internal, stdlib).kind ==
        ImportTargetClass::Kind::stdlib);
  CHECK(resolve_import_target(import_of("src.nothere"), internal, stdlib).kind ==
        ImportTargetClass::Kind::internal);  // first segment is internal
  CHECK(resolve_import_target(import_of("", 1), internal, stdlib).kind ==
        ImportTargetClass::Kind::internal);  // relative
}

TEST_CASE("client fixture ext graph shows the undeclared requests package") {
  testing::TempDir tmp;
  write_client_fixture(tmp.path);
  EnvState env = build_env(tmp.path, ScanConfig{}, default_stdlib_names());

  const ExtNode* pkg = env.g_ext.find("pkg:requests");
  REQUIRE(pkg != nullptr);
  CHECK(pkg->used_in_code);
  CHECK_FALSE(pkg->declared);
  CHECK(pkg->origin == PackageOrigin::external);

  auto gaps = find_dependency_gaps(env.g_ext);
  REQUIRE(gaps.size() == 1);
  CHECK(gaps[0].package == "requests");
  CHECK(gaps[0].kind == GapKind::used_not_declared);
  CHECK(gaps[0].using_files == std::vector<std::string>{"src/client.py"});
}

TEST_CASE("declaring the package closes the gap") {
  testing::TempDir tmp;
  write_client_fixture(tmp.path);
  tmp.write("requirements.txt", "requests\n");
  EnvState env = build_env(tmp.path, ScanConfig{}, default_stdlib_names());

  const ExtNode* pkg = env.g_ext.find("pkg:requests");
  REQUIRE(pkg != nullptr);
  CHECK(pkg->used_in_code);
  CHECK(pkg->declared);
  CHECK(find_dependency_gaps(env.g_ext).empty());
}

TEST_CASE("declared-not-used package is reported") {
  testing::TempDir tmp;
  tmp.write("requirements.txt", "numpy\n");
  tmp.write("a.py", "x = 1\n");
  EnvState env = build_env(tmp.path, ScanConfig{}, default_stdlib_names());
  auto gaps = find_dependency_gaps(env.g_ext);
  REQUIRE(gaps.size() == 1);
  CHECK(gaps[0].package == "numpy");
  CHECK(gaps[0].kind == GapKind::declared_not_used);
}

TEST_CASE("empty repo has one project node and no packages") {
  testing::TempDir tmp;
  EnvState env = build_env(tmp.path, ScanConfig{}, default_stdlib_names());
  REQUIRE(env.g_ext.nodes.size() == 1);
  CHECK(env.g_ext.nodes[0].kind == ExtNodeKind::project);
  CHECK(env.g_ext.edges.empty());
}

TEST_CASE("stdlib imports become stdlib package nodes excluded from gaps") {
  testing::TempDir tmp;
  tmp.write("a.py", "import os\n");
  EnvState env = build_env(tmp.path, ScanConfig{}, default_stdlib_names());
  const ExtNode* pkg = env.g_ext.find("pkg:os");
  REQUIRE(pkg != nullptr);
  CHECK(pkg->origin == PackageOrigin::stdlib);
  CHECK(find_dependency_gaps(env.g_ext).empty());
}

TEST_CASE("alias table maps import names to distribution names") {
  testing::TempDir tmp;
  tmp.write("a.py", "import yaml\n");
  tmp.write("requirements.txt", "pyyaml\n");
  EnvState env = build_env(tmp.path, ScanConfig{}, default_stdlib_names(), {{"yaml", "pyyaml"}});
  const ExtNode* pkg = env.g_ext.find("pkg:pyyaml");
  REQUIRE(pkg != nullptr);
  CHECK(pkg->used_in_code);
  CHECK(pkg->declared);
  CHECK(find_dependency_gaps(env.g_ext).empty());
}

TEST_CASE("graph serialization is canonical") {
  testing::TempDir tmp;
  write_client_fixture(tmp.path);
  auto a = build_env(tmp.path, ScanConfig{}, default_stdlib_names()).g_ext.to_json().dump();
  auto b = build_env(tmp.path, ScanConfig{}, default_stdlib_names()).g_ext.to_json().dump();
  CHECK(a == b);
}

TEST_CASE("every edge endpoint exists and ids are unique") {
  testing::TempDir tmp;
  write_client_fixture(tmp.path);
  ExternalEnvGraph g = build_env(tmp.path, ScanConfig{}, default_stdlib_names()).g_ext;
  std::set<std::string> ids;
  for (const auto& n : g.nodes) CHECK(ids.insert(n.id).second);
  for (const auto& e : g.edges) {
    CHECK(ids.count(e.src));
    CHECK(ids.count(e.dst));
  }
}
