#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crq/qcore/context.hpp"
#include "crq/qcore/state.hpp"

namespace crq::hvmodel {

using Label = std::string;
using qcore::MeasurementContext;
using qcore::State;

/// Finitely supported probability measure on hidden-variable labels.
class StateMeasure {
public:
    StateMeasure() = default;
    explicit StateMeasure(std::vector<std::pair<Label, double>> weights);

    const std::vector<std::pair<Label, double>>& weights() const { return weights_; }
    std::vector<Label> support() const;
    double weight(const Label& l) const;
    bool contains(const Label& l) const;

private:
    std::vector<std::pair<Label, double>> weights_;  // sorted by label
};

/// P(outcome | lambda) for one context and a list of labels.
class ConditionalTable {
public:
    ConditionalTable(MeasurementContext ctx, std::vector<Label> labels, std::vector<std::vector<double>> rows,
                     std::vector<bool> degenerate = {});

    const MeasurementContext& context() const { return ctx_; }
    const std::vector<Label>& labels() const { return labels_; }
    const std::vector<std::vector<double>>& rows() const { return rows_; }
    const std::vector<double>& row(const Label& l) const;
    const std::vector<double>& row(std::size_t k) const { return rows_.at(k); }
    bool degenerate(std::size_t k) const { return degenerate_.at(k); }
    bool degenerate(const Label& l) const;
    std::size_t index_of(const Label& l) const;
    bool has(const Label& l) const;
    double probability(const Label& l, std::size_t flat) const { return row(l).at(flat); }

private:
    MeasurementContext ctx_;
    std::vector<Label> labels_;
    std::vector<std::vector<double>> rows_;
    std::vector<bool> degenerate_;
};

/// Validate a probability row; throws InvalidArgument.
void check_row(const std::vector<double>& row, std::size_t expected_size);

class HiddenVariableModel {
public:
    virtual ~HiddenVariableModel() = default;

    virtual std::string name() const = 0;
    virtual std::vector<Label> labels() const = 0;
    virtual StateMeasure measure_of(const State& psi) const = 0;
    /// P(. | lambda) for a context; throws UncoveredContext when undefined.
    virtual std::vector<double> row(const MeasurementContext& ctx, const Label& label) const = 0;
    /// Labels on which the context's table is defined.
    virtual std::vector<Label> labels_for(const MeasurementContext& ctx) const;

    ConditionalTable table_of(const MeasurementContext& ctx, std::span<const Label> labels) const;
    ConditionalTable table_of(const MeasurementContext& ctx) const;
};

}  // namespace crq::hvmodel
