#pragma once

#include <span>
#include <vector>

#include "crq/qcore/context.hpp"
#include "crq/qcore/state.hpp"

namespace crq::qcore {

/// Born distribution of a context on a state, indexed by flat outcome.
/// The context and the state need only agree on the total dimension.
std::vector<double> born_distribution(const State& psi, const MeasurementContext& ctx);

/// Probability of an eigenvalue tuple; exactly 0 for off-spectrum values.
double born_probability(const State& psi, const MeasurementContext& ctx, std::span<const double> values);

}  // namespace crq::qcore
