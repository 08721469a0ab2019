#include "envalign/evidence.hpp"

#include <algorithm>
#include <regex>

#include "envalign/subprocess.hpp"
#include "envalign/util.hpp"

namespace envalign {

namespace fs = std::filesystem;

const char* to_string(EvidenceKind kind) {
  switch (kind) {
    case EvidenceKind::dependency_install_failure: return "dependency-install-failure";
    case EvidenceKind::missing_module: return "missing-module";
    case EvidenceKind::missing_symbol: return "missing-symbol";
    case EvidenceKind::parse_failure: return "parse-failure";
    case EvidenceKind::test_assertion_failure: return "test-assertion-failure";
    case EvidenceKind::runtime_exception_other: return "runtime-exception-other";
    case EvidenceKind::timeout: return "timeout";
    case EvidenceKind::nonzero_exit_other: return "nonzero-exit-other";
  }
  return "nonzero-exit-other";
}

const char* to_string(OriginHint hint) {
  switch (hint) {
    case OriginHint::external: return "external";
    case OriginHint::internal: return "internal";
    case OriginHint::unknown: return "unknown";
  }
  return "unknown";
}

const char* to_string(Confidence confidence) {
  return confidence == Confidence::certain ? "certain" : "heuristic";
}

std::optional<EvidenceKind> evidence_kind_from_string(const std::string& name) {
  for (auto kind : {EvidenceKind::dependency_install_failure, EvidenceKind::missing_module,
                    EvidenceKind::missing_symbol, EvidenceKind::parse_failure,
                    EvidenceKind::test_assertion_failure, EvidenceKind::runtime_exception_other,
                    EvidenceKind::timeout, EvidenceKind::nonzero_exit_other}) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

std::optional<OriginHint> origin_hint_from_string(const std::string& name) {
  for (auto hint : {OriginHint::external, OriginHint::internal, OriginHint::unknown}) {
    if (name == to_string(hint)) return hint;
  }
  return std::nullopt;
}

nlohmann::json EvidenceRecord::to_json() const {
  nlohmann::json j;
  j["phase"] = to_string(phase);
  j["kind"] = to_string(kind);
  if (subject) j["subject"] = *subject;
  j["origin_hint"] = to_string(origin_hint);
  if (file) j["file"] = *file;
  if (line) j["line"] = *line;
  j["frames"] = nlohmann::json::array();
  for (const auto& f : frames) {
    j["frames"].push_back(
        {{"file", f.file}, {"line", f.line}, {"scope", f.scope}, {"in_repo", f.in_repo}});
  }
  j["excerpt"] = excerpt;
  j["confidence"] = to_string(confidence);
  j["occurrences"] = occurrences;
  return j;
}

nlohmann::json log_to_json(const RawExecutionLog& log) {
  nlohmann::json j;
  j["phase"] = to_string(log.phase);
  if (log.exit_code) j["exit_code"] = *log.exit_code;
  j["timed_out"] = log.timed_out;
  j["stdout"] = log.stdout_text;
  j["stderr"] = log.stderr_text;
  j["stdout_truncated"] = log.stdout_truncated;
  j["stderr_truncated"] = log.stderr_truncated;
  j["duration_seconds"] = log.duration_seconds;
  return j;
}

std::vector<StackFrame> parse_stack_trace(const std::string& stderr_text,
                                          const fs::path& workspace) {
  static const std::regex frame_re(R"(^\s*File \"([^\"]+)\", line (\d+)(?:, in (.*))?\s*$)");
  std::vector<StackFrame> frames;
  std::string ws;
  if (!workspace.empty()) {
    std::error_code ec;
    ws = fs::weakly_canonical(workspace, ec).string();
    if (ec) ws = workspace.string();
  }
  for (const auto& line : split(stderr_text, '\n')) {
    std::smatch m;
    if (!std::regex_match(line, m, frame_re)) continue;
    StackFrame frame;
    frame.file = m[1].str();
    frame.line = std::atoi(m[2].str().c_str());
    frame.scope = m[3].matched ? trim(m[3].str()) : "<module>";
    if (frame.scope.empty()) frame.scope = "<module>";
    if (!ws.empty()) {
      std::error_code ec;
      std::string canon = fs::weakly_canonical(frame.file, ec).string();
      if (!ec && canon.size() > ws.size() && canon.compare(0, ws.size(), ws) == 0 &&
          canon[ws.size()] == '/') {
        frame.in_repo = true;
        frame.file = canon.substr(ws.size() + 1);
      }
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

namespace {

std::string first_segment(const std::string& dotted) { return split(dotted, '.').front(); }

struct GraphContext {
  std::set<std::string> defined_modules;
  std::map<std::string, bool> unresolved_has_match;  // target -> best_match present

  explicit GraphContext(const RepoDependencyGraph& g_int) {
    for (const auto& node : g_int.nodes) {
      if (node.kind == IntNodeKind::module) defined_modules.insert(node.name);
      if (node.kind == IntNodeKind::unresolved_ref) {
        unresolved_has_match[node.name] = node.best_match.has_value();
      }
    }
  }

  // Expand a runtime-reported module name to the unresolved target it masks
  // ("app" -> "app.client").
  std::string refine_subject(const std::string& subject) const {
    if (unresolved_has_match.count(subject)) return subject;
    std::string best;
    for (const auto& [target, _] : unresolved_has_match) {
      if (target.size() > subject.size() && target.compare(0, subject.size(), subject) == 0 &&
          target[subject.size()] == '.') {
        if (best.empty() || target < best) best = target;
      }
    }
    return best.empty() ? subject : best;
  }

  OriginHint origin_for(const std::string& subject) const {
    if (defined_modules.count(first_segment(subject))) return OriginHint::internal;
    auto it = unresolved_has_match.find(subject);
    if (it != unresolved_has_match.end() && it->second) return OriginHint::internal;
    return OriginHint::external;
  }
};

std::string clip_excerpt(const std::string& text) {
  if (text.size() <= kExcerptCap) return text;
  return text.substr(0, kExcerptCap);
}

std::string last_nonempty_line(const std::string& text) {
  auto lines = split(text, '\n');
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    if (!trim(*it).empty()) return *it;
  }
  return "";
}

void add_record(std::vector<EvidenceRecord>& records, EvidenceRecord rec) {
  for (auto& existing : records) {
    if (existing.phase == rec.phase && existing.kind == rec.kind &&
        existing.subject == rec.subject && existing.excerpt == rec.excerpt) {
      existing.occurrences += 1;
      return;
    }
  }
  records.push_back(std::move(rec));
}

void scan_log(const RawExecutionLog& log, const GraphContext& ctx, const fs::path& workspace,
              std::vector<EvidenceRecord>& records) {
  static const std::regex missing_module_re(
      R"(ModuleNotFoundError: No module named '([^']+)')");
  static const std::regex missing_symbol_re(
      R"(ImportError: cannot import name '([^']+)' from '([^']+)')");
  static const std::regex syntax_re(R"(^\s*(SyntaxError|IndentationError|TabError)\b)");
  static const std::regex install_re(
      R"((?:No matching distribution found for|Could not find a version that satisfies the requirement) ([A-Za-z0-9._\-]+))");
  static const std::regex generic_re(
      R"(^([A-Za-z_][A-Za-z0-9_.]*(?:Error|Exception|Exit|Interrupt))(?::.*)?$)");

  size_t before = records.size();

  if (log.timed_out) {
    EvidenceRecord rec;
    rec.phase = log.phase;
    rec.kind = EvidenceKind::timeout;
    rec.excerpt = clip_excerpt(last_nonempty_line(log.stderr_text));
    rec.confidence = Confidence::certain;
    add_record(records, rec);
    return;
  }
  if (log.exit_code && *log.exit_code == 0) return;

  auto all_frames = parse_stack_trace(log.stderr_text, workspace);
  auto lines = split(log.stderr_text, '\n');

  // frames preceding a given stderr line index
  auto frames_before = [&](size_t line_idx) {
    std::vector<StackFrame> out;
    size_t seen = 0;
    static const std::regex frame_line(R"(^\s*File \")");
    for (size_t i = 0; i < line_idx && i < lines.size(); ++i) {
      if (std::regex_search(lines[i], frame_line)) {
        if (seen < all_frames.size()) out.push_back(all_frames[seen]);
        ++seen;
      }
    }
    return out;
  };

  auto finish = [&](EvidenceRecord& rec, size_t line_idx) {
    rec.phase = log.phase;
    rec.frames = frames_before(line_idx);
    for (auto it = rec.frames.rbegin(); it != rec.frames.rend(); ++it) {
      if (it->in_repo) {
        rec.file = it->file;
        rec.line = it->line;
        break;
      }
    }
    add_record(records, rec);
  };

  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    std::smatch m;
    if (std::regex_search(line, m, missing_module_re)) {
      EvidenceRecord rec;
      rec.kind = EvidenceKind::missing_module;
      std::string subject = ctx.refine_subject(m[1].str());
      rec.subject = subject;
      rec.origin_hint = ctx.origin_for(subject);
      rec.excerpt = clip_excerpt(line);
      finish(rec, i);
      continue;
    }
    if (std::regex_search(line, m, missing_symbol_re)) {
      EvidenceRecord rec;
      rec.kind = EvidenceKind::missing_symbol;
      rec.subject = m[2].str() + "." + m[1].str();
      rec.origin_hint = ctx.defined_modules.count(first_segment(m[2].str()))
                            ? OriginHint::internal
                            : OriginHint::unknown;
      rec.excerpt = clip_excerpt(line);
      finish(rec, i);
      continue;
    }
    if (std::regex_search(line, m, syntax_re)) {
      EvidenceRecord rec;
      rec.kind = EvidenceKind::parse_failure;
      rec.origin_hint = OriginHint::internal;
      rec.excerpt = clip_excerpt(line);
      finish(rec, i);
      continue;
    }
    if (log.phase == Phase::install && std::regex_search(line, m, install_re)) {
      EvidenceRecord rec;
      rec.kind = EvidenceKind::dependency_install_failure;
      rec.subject = normalize_package_name(m[1].str());
      rec.origin_hint = OriginHint::external;
      rec.excerpt = clip_excerpt(line);
      finish(rec, i);
      continue;
    }
    if (line.find("AssertionError") != std::string::npos &&
        std::regex_search(line, m, generic_re)) {
      EvidenceRecord rec;
      rec.kind = EvidenceKind::test_assertion_failure;
      rec.excerpt = clip_excerpt(line);
      finish(rec, i);
      continue;
    }
    if (std::regex_match(line, m, generic_re)) {
      EvidenceRecord rec;
      rec.kind = EvidenceKind::runtime_exception_other;
      rec.subject = m[1].str();
      rec.excerpt = clip_excerpt(line);
      finish(rec, i);
      continue;
    }
  }

  if (records.size() == before) {
    // unparseable failing log
    EvidenceRecord rec;
    rec.phase = log.phase;
    rec.kind = EvidenceKind::nonzero_exit_other;
    std::string line = last_nonempty_line(log.stderr_text);
    if (line.empty()) line = last_nonempty_line(log.stdout_text);
    rec.excerpt = clip_excerpt(line);
    rec.confidence = Confidence::heuristic;
    add_record(records, rec);
  }
}

}  // namespace

std::vector<EvidenceRecord> normalize(const std::vector<RawExecutionLog>& logs,
                                      const ExternalEnvGraph& g_ext,
                                      const RepoDependencyGraph& g_int,
                                      const fs::path& workspace) {
  (void)g_ext;
  GraphContext ctx(g_int);
  std::vector<EvidenceRecord> records;
  for (const auto& log : logs) scan_log(log, ctx, workspace, records);
  std::stable_sort(records.begin(), records.end(),
                   [](const EvidenceRecord& a, const EvidenceRecord& b) {
                     return static_cast<int>(a.phase) < static_cast<int>(b.phase);
                   });
  return records;
}

bool validate_record(const EvidenceRecord& record, const std::vector<RawExecutionLog>& logs,
                     const RepoDependencyGraph& g_int, std::string* reason) {
  auto fail = [&](const char* why) {
    if (reason) *reason = why;
    return false;
  };
  if (record.kind == EvidenceKind::missing_module &&
      (!record.subject || record.subject->empty())) {
    return fail("missing-module record without subject");
  }
  if (record.excerpt.size() > kExcerptCap) return fail("excerpt too large");
  if (!record.excerpt.empty()) {
    bool found = false;
    for (const auto& log : logs) {
      if (log.stdout_text.find(record.excerpt) != std::string::npos ||
          log.stderr_text.find(record.excerpt) != std::string::npos) {
        found = true;
        break;
      }
    }
    if (!found) return fail("excerpt is not a substring of any log");
  }
  if (record.line && *record.line <= 0) return fail("non-positive line");
  if (record.subject && record.kind == EvidenceKind::missing_module) {
    GraphContext ctx(g_int);
    bool defined = ctx.defined_modules.count(first_segment(*record.subject)) > 0;
    auto it = ctx.unresolved_has_match.find(*record.subject);
    bool suffix = it != ctx.unresolved_has_match.end() && it->second;
    if (record.origin_hint == OriginHint::external && defined) {
      return fail("origin external but module defined");
    }
    if (record.origin_hint == OriginHint::internal && !defined && !suffix) {
      return fail("origin internal without defined module or suffix match");
    }
  }
  return true;
}

std::optional<EvidenceRecord> record_from_json(const nlohmann::json& j, std::string* reason) {
  auto fail = [&](const char* why) {
    if (reason) *reason = why;
    return std::optional<EvidenceRecord>{};
  };
  if (!j.is_object()) return fail("record is not an object");
  EvidenceRecord rec;
  std::string phase = j.value("phase", "");
  if (phase == "install") rec.phase = Phase::install;
  else if (phase == "launch") rec.phase = Phase::launch;
  else if (phase == "test") rec.phase = Phase::test;
  else return fail("bad phase");
  auto kind = evidence_kind_from_string(j.value("kind", ""));
  if (!kind) return fail("bad kind");
  rec.kind = *kind;
  if (j.contains("subject")) {
    if (!j["subject"].is_string()) return fail("bad subject");
    rec.subject = j["subject"].get<std::string>();
  }
  auto origin = origin_hint_from_string(j.value("origin_hint", "unknown"));
  if (!origin) return fail("bad origin_hint");
  rec.origin_hint = *origin;
  if (j.contains("file")) rec.file = j["file"].get<std::string>();
  if (j.contains("line")) rec.line = j["line"].get<int>();
  if (j.contains("frames") && j["frames"].is_array()) {
    for (const auto& f : j["frames"]) {
      rec.frames.push_back({f.value("file", ""), f.value("line", 1), f.value("scope", "<module>"),
                            f.value("in_repo", false)});
    }
  }
  rec.excerpt = j.value("excerpt", "");
  std::string conf = j.value("confidence", "certain");
  if (conf == "certain") rec.confidence = Confidence::certain;
  else if (conf == "heuristic") rec.confidence = Confidence::heuristic;
  else return fail("bad confidence");
  rec.occurrences = j.value("occurrences", 1);
  return rec;
}

std::vector<EvidenceRecord> ExternalNormalizer::normalize(
    const std::vector<RawExecutionLog>& logs, const ExternalEnvGraph& g_ext,
    const RepoDependencyGraph& g_int, const fs::path& workspace,
    std::vector<std::string>* warnings) const {
  nlohmann::json request;
  request["logs"] = nlohmann::json::array();
  for (const auto& log : logs) request["logs"].push_back(log_to_json(log));
  request["g_ext"] = g_ext.to_json();
  request["g_int"] = g_int.to_json();

  auto result = run_command(cmd.argv, request.dump(), timeout_seconds);
  if (result.timed_out || !result.exit_code || *result.exit_code != 0) {
    if (warnings) warnings->push_back("external normalizer failed, using rule-based fallback");
    return envalign::normalize(logs, g_ext, g_int, workspace);
  }
  nlohmann::json parsed = nlohmann::json::parse(result.stdout_text, nullptr, false);
  if (!parsed.is_array()) {
    if (warnings) warnings->push_back("external normalizer output invalid, using fallback");
    return envalign::normalize(logs, g_ext, g_int, workspace);
  }
  std::vector<EvidenceRecord> records;
  for (const auto& item : parsed) {
    std::string reason;
    auto rec = record_from_json(item, &reason);
    if (!rec || !validate_record(*rec, logs, g_int, &reason)) {
      if (warnings) warnings->push_back("dropped external normalizer record: " + reason);
      continue;
    }
    records.push_back(std::move(*rec));
  }
  return records;
}

}  // namespace envalign
