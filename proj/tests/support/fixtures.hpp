#pragma once

#include <functional>
#include <memory>
#include <string>

#include "crq/hvmodel/born_model.hpp"
#include "crq/hvmodel/model.hpp"
#include "crq/qcore/unitary.hpp"

namespace crq::testing {

using hvmodel::BornModel;
using hvmodel::HiddenVariableModel;
using hvmodel::Label;
using hvmodel::StateMeasure;
using qcore::MeasurementContext;
using qcore::State;

/// Born rows plus an extra "chaos" label of weight `w` in every measure whose
/// rows are uniform. Averages no longer match the Born rule.
class PerturbedMeasureModel : public HiddenVariableModel {
public:
    explicit PerturbedMeasureModel(double w = 0.05) : w_(w) {}
    std::string name() const override { return "perturbed-measure"; }
    std::vector<Label> labels() const override;
    StateMeasure measure_of(const State& psi) const override;
    std::vector<double> row(const MeasurementContext& ctx, const Label& label) const override;
    std::vector<Label> labels_for(const MeasurementContext& ctx) const override;
    const BornModel& born() const { return born_; }

private:
    double w_;
    BornModel born_;
};

/// Every Born label is split into "/+" and "/-" halves. On joint contexts
/// selected by `signals`, the halves move mass delta between two outcomes
/// with different party-A values in opposite directions, so averages stay
/// Born while per-lambda marginals depend on the remote setting.
class SignalingModel : public HiddenVariableModel {
public:
    using Predicate = std::function<bool(const MeasurementContext&)>;
    explicit SignalingModel(double delta = 0.1, Predicate signals = {});
    std::string name() const override { return "signaling"; }
    std::vector<Label> labels() const override;
    StateMeasure measure_of(const State& psi) const override;
    std::vector<double> row(const MeasurementContext& ctx, const Label& label) const override;
    std::vector<Label> labels_for(const MeasurementContext& ctx) const override;

private:
    double delta_;
    Predicate signals_;
    BornModel born_;
};

/// Joint contexts with one party-A and one party-B entry whose B observable is not diagonal.
bool signals_on_nondiagonal_b(const MeasurementContext& ctx);
/// Joint contexts on at least `factors` tensor factors.
SignalingModel::Predicate signals_on_large(std::size_t factors);

/// Two labels, each predetermining every +-1-valued observable on C^2 (x) C^2:
/// lambda+ answers +1 and lambda- answers -1 everywhere. mu is uniform for every state.
class PredeterminedModel : public HiddenVariableModel {
public:
    std::string name() const override { return "predetermined"; }
    std::vector<Label> labels() const override { return {"lambda+", "lambda-"}; }
    StateMeasure measure_of(const State& psi) const override;
    std::vector<double> row(const MeasurementContext& ctx, const Label& label) const override;
};

/// Born rows, reversed whenever `twist(state, ctx)` holds.
class TwistedModel : public HiddenVariableModel {
public:
    using Twist = std::function<bool(const State&, const MeasurementContext&)>;
    TwistedModel(std::string name, Twist twist) : name_(std::move(name)), twist_(std::move(twist)) {}
    std::string name() const override { return name_; }
    std::vector<Label> labels() const override { return born_.labels(); }
    StateMeasure measure_of(const State& psi) const override { return born_.measure_of(psi); }
    std::vector<double> row(const MeasurementContext& ctx, const Label& label) const override;
    std::vector<Label> labels_for(const MeasurementContext& ctx) const override { return born_.labels_for(ctx); }

private:
    std::string name_;
    Twist twist_;
    BornModel born_;
};

/// Reverses rows of contexts with a non-diagonal observable: fails UI.
std::unique_ptr<TwistedModel> conjugation_blind_model();
/// Reverses rows for states close to (but not equal to) `reference`: fails CP.
std::unique_ptr<TwistedModel> cp_jump_model(State reference);
/// Reverses rows for states of dimension above `dim`: fails PE and SE.
std::unique_ptr<TwistedModel> dimension_jump_model(Index dim);

/// The tabulated signaling fixture shipped in tests/fixtures/signaling.json.
std::string fixture_path(const std::string& name);

}  // namespace crq::testing
