#include "crq/hvmodel/born_model.hpp"

#include <cmath>

#include "crq/qcore/born.hpp"

namespace crq::hvmodel {

namespace {

constexpr double kSameState = 1e-12;
const std::string kPrefix = "born#";

}  // namespace

BornModel::BornModel(const std::vector<State>& states) {
    for (const auto& s : states) register_state(s);
}

std::vector<Label> BornModel::labels() const {
    std::lock_guard lock(mu_);
    std::vector<Label> out;
    for (std::size_t k = 0; k < states_.size(); ++k) out.push_back(kPrefix + std::to_string(k));
    return out;
}

Label BornModel::register_state(const State& psi) const {
    std::vector<std::shared_ptr<const State>> snapshot;
    {
        std::lock_guard lock(mu_);
        snapshot = states_;
    }
    for (std::size_t k = 0; k < snapshot.size(); ++k) {
        const auto& s = *snapshot[k];
        if (s.dimension() != psi.dimension()) continue;
        if (1.0 - std::abs(qcore::inner(s, psi)) <= kSameState) return kPrefix + std::to_string(k);
    }
    std::lock_guard lock(mu_);
    // another thread may have appended meanwhile
    for (std::size_t k = snapshot.size(); k < states_.size(); ++k) {
        const auto& s = *states_[k];
        if (s.dimension() == psi.dimension() && 1.0 - std::abs(qcore::inner(s, psi)) <= kSameState)
            return kPrefix + std::to_string(k);
    }
    states_.push_back(std::make_shared<const State>(psi));
    return kPrefix + std::to_string(states_.size() - 1);
}

std::shared_ptr<const State> BornModel::state_of(const Label& label) const {
    if (label.rfind(kPrefix, 0) != 0) throw Error(ErrorKind::UncoveredContext, "unknown label '" + label + "'");
    std::size_t k = 0;
    try {
        k = std::stoul(label.substr(kPrefix.size()));
    } catch (const std::exception&) {
        throw Error(ErrorKind::UncoveredContext, "unknown label '" + label + "'");
    }
    std::lock_guard lock(mu_);
    if (k >= states_.size()) throw Error(ErrorKind::UncoveredContext, "unknown label '" + label + "'");
    return states_[k];
}

StateMeasure BornModel::measure_of(const State& psi) const {
    return StateMeasure({{register_state(psi), 1.0}});
}

std::vector<double> BornModel::row(const MeasurementContext& ctx, const Label& label) const {
    auto s = state_of(label);
    if (s->dimension() != ctx.total_dimension())
        throw Error(ErrorKind::UncoveredContext, "label '" + label + "' lives on a space of another dimension");
    return qcore::born_distribution(*s, ctx);
}

std::vector<Label> BornModel::labels_for(const MeasurementContext& ctx) const {
    std::lock_guard lock(mu_);
    std::vector<Label> out;
    for (std::size_t k = 0; k < states_.size(); ++k)
        if (states_[k]->dimension() == ctx.total_dimension()) out.push_back(kPrefix + std::to_string(k));
    return out;
}

}  // namespace crq::hvmodel
