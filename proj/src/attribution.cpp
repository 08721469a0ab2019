#include "envalign/attribution.hpp"

#include <algorithm>

#include "envalign/util.hpp"

namespace envalign {

const char* to_string(AttributionSource source) {
  switch (source) {
    case AttributionSource::external_dependency: return "external-dependency";
    case AttributionSource::internal_reference: return "internal-reference";
    case AttributionSource::residual_logic: return "residual-logic";
    case AttributionSource::pass: return "pass";
  }
  return "pass";
}

nlohmann::json AttributionVerdict::to_json() const {
  nlohmann::json j;
  j["source"] = to_string(source);
  j["fired_rules"] = fired_rules;
  j["supporting_evidence"] = supporting_evidence;
  j["supporting_nodes"] = supporting_nodes;
  return j;
}

namespace {

struct ClauseHits {
  std::vector<std::string> rules;
  std::vector<int> evidence;
  std::vector<std::string> nodes;
  bool fired() const { return !rules.empty(); }
};

ClauseHits external_clause(const ExternalEnvGraph& g_ext,
                           const std::vector<EvidenceRecord>& evidence) {
  ClauseHits hits;
  for (size_t i = 0; i < evidence.size(); ++i) {
    const auto& rec = evidence[i];
    if (rec.kind == EvidenceKind::dependency_install_failure) {
      hits.rules.push_back("external.install-failure");
      hits.evidence.push_back(static_cast<int>(i));
      if (rec.subject) hits.nodes.push_back("pkg:" + *rec.subject);
    }
    // ambiguous origin breaks upward to external
    if (rec.kind == EvidenceKind::missing_module && rec.origin_hint != OriginHint::internal) {
      hits.rules.push_back(rec.origin_hint == OriginHint::external
                               ? "external.missing-module"
                               : "external.missing-module-ambiguous");
      hits.evidence.push_back(static_cast<int>(i));
      if (rec.subject) {
        std::string first = rec.subject->substr(0, rec.subject->find('.'));
        hits.nodes.push_back("pkg:" + normalize_package_name(first));
      }
    }
  }
  // used-not-declared gap corroborated by a launch/test failure
  bool downstream_failure = std::any_of(evidence.begin(), evidence.end(), [](const auto& rec) {
    return rec.phase == Phase::launch || rec.phase == Phase::test;
  });
  if (downstream_failure) {
    for (const auto& gap : find_dependency_gaps(g_ext)) {
      if (gap.kind == GapKind::used_not_declared) {
        hits.rules.push_back("external.gap-used-not-declared");
        hits.nodes.push_back("pkg:" + gap.package);
      }
    }
  }
  std::sort(hits.rules.begin(), hits.rules.end());
  hits.rules.erase(std::unique(hits.rules.begin(), hits.rules.end()), hits.rules.end());
  std::sort(hits.nodes.begin(), hits.nodes.end());
  hits.nodes.erase(std::unique(hits.nodes.begin(), hits.nodes.end()), hits.nodes.end());
  return hits;
}

ClauseHits internal_clause(const RepoDependencyGraph& g_int,
                           const std::vector<EvidenceRecord>& evidence) {
  ClauseHits hits;
  for (size_t i = 0; i < evidence.size(); ++i) {
    const auto& rec = evidence[i];
    if (rec.kind == EvidenceKind::missing_module && rec.origin_hint == OriginHint::internal) {
      hits.rules.push_back("internal.missing-module");
      hits.evidence.push_back(static_cast<int>(i));
      if (rec.subject) hits.nodes.push_back("unres:" + *rec.subject);
    }
    if (rec.kind == EvidenceKind::missing_symbol) {
      hits.rules.push_back("internal.missing-symbol");
      hits.evidence.push_back(static_cast<int>(i));
    }
    if (rec.kind == EvidenceKind::parse_failure) {
      hits.rules.push_back("internal.parse-failure");
      hits.evidence.push_back(static_cast<int>(i));
      if (rec.file) hits.nodes.push_back("perr:" + *rec.file);
    }
  }
  if (!evidence.empty()) {
    for (const auto& node : g_int.nodes) {
      if (node.kind == IntNodeKind::unresolved_ref) {
        hits.rules.push_back("internal.unresolved-ref-node");
        hits.nodes.push_back(node.id);
      }
      if (node.kind == IntNodeKind::parse_error) {
        hits.rules.push_back("internal.parse-error-node");
        hits.nodes.push_back(node.id);
      }
    }
  }
  std::sort(hits.rules.begin(), hits.rules.end());
  hits.rules.erase(std::unique(hits.rules.begin(), hits.rules.end()), hits.rules.end());
  std::sort(hits.nodes.begin(), hits.nodes.end());
  hits.nodes.erase(std::unique(hits.nodes.begin(), hits.nodes.end()), hits.nodes.end());
  return hits;
}

}  // namespace

bool external_satisfiable(const ExternalEnvGraph& g_ext,
                          const std::vector<EvidenceRecord>& evidence) {
  return !external_clause(g_ext, evidence).fired();
}

bool internal_resolved(const RepoDependencyGraph& g_int,
                       const std::vector<EvidenceRecord>& evidence) {
  return !internal_clause(g_int, evidence).fired();
}

AttributionVerdict attribute(const ExternalEnvGraph& g_ext, const RepoDependencyGraph& g_int,
                             const std::vector<EvidenceRecord>& evidence) {
  for (const auto& rec : evidence) {
    if (rec.file && !g_int.find("file:" + *rec.file)) {
      throw InconsistentInputs("evidence references unknown file: " + *rec.file);
    }
  }

  AttributionVerdict verdict;
  if (evidence.empty()) {
    verdict.source = AttributionSource::pass;
    return verdict;
  }
  auto ext = external_clause(g_ext, evidence);
  if (ext.fired()) {
    verdict.source = AttributionSource::external_dependency;
    verdict.fired_rules = std::move(ext.rules);
    verdict.supporting_evidence = std::move(ext.evidence);
    verdict.supporting_nodes = std::move(ext.nodes);
    if (verdict.supporting_evidence.empty()) {
      // gap-only rule: the corroborating failure is the supporting evidence
      for (size_t i = 0; i < evidence.size(); ++i) {
        verdict.supporting_evidence.push_back(static_cast<int>(i));
      }
    }
    return verdict;
  }
  auto intr = internal_clause(g_int, evidence);
  if (intr.fired()) {
    verdict.source = AttributionSource::internal_reference;
    verdict.fired_rules = std::move(intr.rules);
    verdict.supporting_evidence = std::move(intr.evidence);
    verdict.supporting_nodes = std::move(intr.nodes);
    if (verdict.supporting_evidence.empty()) {
      for (size_t i = 0; i < evidence.size(); ++i) {
        verdict.supporting_evidence.push_back(static_cast<int>(i));
      }
    }
    return verdict;
  }
  verdict.source = AttributionSource::residual_logic;
  verdict.fired_rules = {"residual.failing-validation"};
  for (size_t i = 0; i < evidence.size(); ++i) {
    verdict.supporting_evidence.push_back(static_cast<int>(i));
  }
  verdict.supporting_nodes = {"project"};
  return verdict;
}

}  // namespace envalign
