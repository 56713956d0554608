#pragma once

#include <functional>

#include "crq/hvmodel/model.hpp"

namespace crq::hvmodel {

/// Event on outcome tuples, given as eigenvalue indices per context entry.
using OutcomeEvent = std::function<bool(const std::vector<std::size_t>&)>;

/// Rows whose event mass is at most this are treated as conditioning on a null event.
constexpr double kNullEvent = 1e-14;

/// Condition every row on an event. Rows with zero event mass become
/// all-zero and are flagged degenerate. Throws EmptyEvent when no outcome
/// satisfies the event.
ConditionalTable condition_table(const ConditionalTable& table, const OutcomeEvent& event);

}  // namespace crq::hvmodel
