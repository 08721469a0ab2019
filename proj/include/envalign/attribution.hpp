#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "envalign/evidence.hpp"

namespace envalign {

enum class AttributionSource { external_dependency, internal_reference, residual_logic, pass };

const char* to_string(AttributionSource source);

struct AttributionVerdict {
  AttributionSource source = AttributionSource::pass;
  std::vector<std::string> fired_rules;
  std::vector<int> supporting_evidence;      // indices into the evidence list
  std::vector<std::string> supporting_nodes; // graph node ids

  nlohmann::json to_json() const;
};

struct InconsistentInputs : std::runtime_error {
  explicit InconsistentInputs(const std::string& what) : std::runtime_error(what) {}
};

// Strict priority: external-dependency > internal-reference > residual-logic.
AttributionVerdict attribute(const ExternalEnvGraph& g_ext, const RepoDependencyGraph& g_int,
                             const std::vector<EvidenceRecord>& evidence);

// false iff the external-dependency clause fires
bool external_satisfiable(const ExternalEnvGraph& g_ext,
                          const std::vector<EvidenceRecord>& evidence);

// false iff the internal-reference clause fires
bool internal_resolved(const RepoDependencyGraph& g_int,
                       const std::vector<EvidenceRecord>& evidence);

}  // namespace envalign
