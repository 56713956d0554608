#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "crq/hvmodel/model.hpp"

namespace crq::hvmodel {

/// Explicitly tabulated model, usually loaded from JSON:
///
///   {"name": "...", "lambda": ["l0", "l1"],
///    "measures": [{"state": {...}, "support": {"l0": 0.5, "l1": 0.5}}],
///    "tables": [{"dims": [2, 2],
///                "context": [{"re": [[...]], "factors": [0], "party": "A"}, ...],
///                "rows": {"l0": {"0,1": 1.0}, "l1": [0.25, 0.25, 0.25, 0.25]}}]}
///
/// Outcome keys are comma-separated eigenvalue indices (ascending order).
class TabularModel : public HiddenVariableModel {
public:
    struct MeasureEntry {
        State state;
        StateMeasure measure;
    };
    struct TableEntry {
        MeasurementContext context;
        std::map<Label, std::vector<double>> rows;
    };

    explicit TabularModel(std::string name = "tabular");

    static TabularModel from_json(const nlohmann::json& j);
    static TabularModel from_file(const std::string& path);
    nlohmann::json to_json() const;

    void add_label(const Label& l);
    void add_measure(State psi, StateMeasure mu);
    void add_table(MeasurementContext ctx, std::map<Label, std::vector<double>> rows);

    std::string name() const override { return name_; }
    std::vector<Label> labels() const override { return labels_; }
    StateMeasure measure_of(const State& psi) const override;
    std::vector<double> row(const MeasurementContext& ctx, const Label& label) const override;
    std::vector<Label> labels_for(const MeasurementContext& ctx) const override;

    const std::vector<MeasureEntry>& measures() const { return measures_; }
    const std::vector<TableEntry>& tables() const { return tables_; }

private:
    const TableEntry* find_table(const MeasurementContext& ctx) const;

    std::string name_;
    std::vector<Label> labels_;
    std::vector<MeasureEntry> measures_;
    std::vector<TableEntry> tables_;
};

}  // namespace crq::hvmodel
