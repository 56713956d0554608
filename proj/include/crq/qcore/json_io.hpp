#pragma once

#include <json.hpp>

#include "crq/qcore/context.hpp"
#include "crq/qcore/state.hpp"

namespace crq::qcore {

// State: {"dims":[...], "re":[...], "im":[...]} or, sparsely,
// {"dims":[...], "entries":[[index, re, im], ...]}.
nlohmann::json state_to_json(const State& psi);
State state_from_json(const nlohmann::json& j);

// Observable: {"re":[[...]], "im":[[...]]}; "im" may be omitted.
nlohmann::json observable_to_json(const Observable& obs);
Observable observable_from_json(const nlohmann::json& j);

// Context: {"dims":[...], "entries":[{observable..., "factors":[...], "party":"A"}]}.
// A bare observable, or a list of entries without "dims", acts on the whole space.
nlohmann::json context_to_json(const MeasurementContext& ctx);
MeasurementContext context_from_json(const nlohmann::json& j);

std::string party_name(Party p);
Party party_from_name(const std::string& s);

}  // namespace crq::qcore
