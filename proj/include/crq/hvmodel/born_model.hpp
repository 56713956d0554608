#pragma once

#include <memory>
#include <mutex>

#include "crq/hvmodel/model.hpp"

namespace crq::hvmodel {

/// Quantum mechanics read as a hidden-variable model: the hidden variable is
/// the state itself, mu_psi is a point mass and the tables are Born rows.
///
/// States are registered on first use and get labels "born#0", "born#1", ...
/// States equal up to a phase (within 1e-12) share a label.
class BornModel : public HiddenVariableModel {
public:
    BornModel() = default;
    explicit BornModel(const std::vector<State>& states);

    std::string name() const override { return "born"; }
    std::vector<Label> labels() const override;
    StateMeasure measure_of(const State& psi) const override;
    std::vector<double> row(const MeasurementContext& ctx, const Label& label) const override;
    std::vector<Label> labels_for(const MeasurementContext& ctx) const override;

    Label register_state(const State& psi) const;
    std::shared_ptr<const State> state_of(const Label& label) const;

private:
    mutable std::mutex mu_;
    mutable std::vector<std::shared_ptr<const State>> states_;
};

}  // namespace crq::hvmodel
