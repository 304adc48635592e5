#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "bpsim/auxctrl.hpp"
#include "bpsim/model.hpp"

namespace bpsim {

struct LoadedScenario {
    ScenarioSpec spec;
    std::optional<AuxSpec> aux;
};

/// Parses and fully validates a scenario file. Scenario numbers may be plain
/// JSON numbers or exact fraction strings like "7/10". Parse and validation
/// failures throw ScenarioError / ValidationError with field context.
LoadedScenario load_scenario(const std::string& path);

/// Parses a scenario from an in-memory JSON document (same contract).
LoadedScenario parse_scenario(const nlohmann::json& doc, const std::string& origin = "<memory>");

/// Canonical serialization; load(emit(spec)) reproduces the spec exactly.
nlohmann::json emit_scenario(const ScenarioSpec& spec, const AuxSpec* aux = nullptr);

}  // namespace bpsim
