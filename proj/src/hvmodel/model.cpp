#include "crq/hvmodel/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace crq::hvmodel {

namespace {
constexpr double kWeightTol = 1e-12;
constexpr double kRowTol = 1e-10;
}  // namespace

StateMeasure::StateMeasure(std::vector<std::pair<Label, double>> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw Error(ErrorKind::InvalidArgument, "measure with empty support");
    std::sort(weights_.begin(), weights_.end());
    double total = 0.0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        if (k > 0 && weights_[k].first == weights_[k - 1].first)
            throw Error(ErrorKind::InvalidArgument, "repeated label in measure");
        if (!(weights_[k].second > 0.0)) throw Error(ErrorKind::InvalidArgument, "support weight must be positive");
        total += weights_[k].second;
    }
    if (std::abs(total - 1.0) > kWeightTol) throw Error(ErrorKind::NotNormalized, "measure weights do not sum to 1");
}

std::vector<Label> StateMeasure::support() const {
    std::vector<Label> s;
    for (const auto& [l, w] : weights_) s.push_back(l);
    return s;
}

double StateMeasure::weight(const Label& l) const {
    for (const auto& [k, w] : weights_)
        if (k == l) return w;
    return 0.0;
}

bool StateMeasure::contains(const Label& l) const { return weight(l) > 0.0; }

void check_row(const std::vector<double>& row, std::size_t expected_size) {
    if (row.size() != expected_size) throw Error(ErrorKind::DimensionMismatch, "table row length");
    double s = 0.0;
    for (double p : row) {
        if (!(p >= -kRowTol && p <= 1.0 + kRowTol)) throw Error(ErrorKind::InvalidArgument, "probability outside [0,1]");
        s += p;
    }
    if (std::abs(s - 1.0) > kRowTol) throw Error(ErrorKind::NotNormalized, "table row does not sum to 1");
}

ConditionalTable::ConditionalTable(MeasurementContext ctx, std::vector<Label> labels,
                                   std::vector<std::vector<double>> rows, std::vector<bool> degenerate)
    : ctx_(std::move(ctx)), labels_(std::move(labels)), rows_(std::move(rows)), degenerate_(std::move(degenerate)) {
    if (labels_.size() != rows_.size()) throw Error(ErrorKind::DimensionMismatch, "labels and rows differ in count");
    if (degenerate_.empty()) degenerate_.assign(rows_.size(), false);
    if (degenerate_.size() != rows_.size()) throw Error(ErrorKind::DimensionMismatch, "degenerate flags");
    const std::size_t n = ctx_.outcome_count();
    for (std::size_t k = 0; k < rows_.size(); ++k) {
        if (degenerate_[k]) {
            if (rows_[k].size() != n) throw Error(ErrorKind::DimensionMismatch, "table row length");
            for (double p : rows_[k])
                if (p != 0.0) throw Error(ErrorKind::InvalidArgument, "degenerate row must be all zero");
        } else {
            check_row(rows_[k], n);
        }
    }
}

std::size_t ConditionalTable::index_of(const Label& l) const {
    auto it = std::find(labels_.begin(), labels_.end(), l);
    if (it == labels_.end()) throw Error(ErrorKind::UncoveredContext, "label '" + l + "' not in table");
    return static_cast<std::size_t>(it - labels_.begin());
}

bool ConditionalTable::has(const Label& l) const {
    return std::find(labels_.begin(), labels_.end(), l) != labels_.end();
}

const std::vector<double>& ConditionalTable::row(const Label& l) const { return rows_[index_of(l)]; }

bool ConditionalTable::degenerate(const Label& l) const { return degenerate_[index_of(l)]; }

std::vector<Label> HiddenVariableModel::labels_for(const MeasurementContext&) const { return labels(); }

ConditionalTable HiddenVariableModel::table_of(const MeasurementContext& ctx, std::span<const Label> labels) const {
    std::vector<Label> ls(labels.begin(), labels.end());
    std::vector<std::vector<double>> rows;
    rows.reserve(ls.size());
    for (const auto& l : ls) rows.push_back(row(ctx, l));
    return ConditionalTable(ctx, std::move(ls), std::move(rows));
}

ConditionalTable HiddenVariableModel::table_of(const MeasurementContext& ctx) const {
    auto ls = labels_for(ctx);
    return table_of(ctx, ls);
}

}  // namespace crq::hvmodel
