#include "crq/hvmodel/tabular_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "crq/qcore/json_io.hpp"

namespace crq::hvmodel {

using nlohmann::json;

namespace {

constexpr double kSameState = 1e-9;

std::vector<std::size_t> parse_key(const std::string& key) {
    std::vector<std::size_t> idx;
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t pos = 0;
            long v = std::stol(part, &pos);
            if (v < 0) throw std::invalid_argument("negative");
            idx.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw Error(ErrorKind::Parse, "bad outcome key '" + key + "'");
        }
    }
    return idx;
}

std::vector<double> parse_row(const json& r, const MeasurementContext& ctx) {
    std::vector<double> row(ctx.outcome_count(), 0.0);
    if (r.is_array()) {
        if (r.size() != row.size()) throw Error(ErrorKind::Parse, "dense row has the wrong length");
        for (std::size_t k = 0; k < row.size(); ++k) row[k] = r[k].get<double>();
        return row;
    }
    if (!r.is_object()) throw Error(ErrorKind::Parse, "row must be an object or an array");
    for (const auto& [key, val] : r.items()) {
        auto idx = parse_key(key);
        try {
            row[ctx.flat_index(idx)] += val.get<double>();
        } catch (const Error& e) {
            throw Error(ErrorKind::Parse, "outcome key '" + key + "': " + e.what());
        }
    }
    return row;
}

}  // namespace

TabularModel::TabularModel(std::string name) : name_(std::move(name)) {}

void TabularModel::add_label(const Label& l) {
    if (std::find(labels_.begin(), labels_.end(), l) == labels_.end()) labels_.push_back(l);
}

void TabularModel::add_measure(State psi, StateMeasure mu) {
    for (const auto& l : mu.support())
        if (std::find(labels_.begin(), labels_.end(), l) == labels_.end())
            throw Error(ErrorKind::InvalidArgument, "measure uses undeclared label '" + l + "'");
    measures_.push_back({std::move(psi), std::move(mu)});
}

void TabularModel::add_table(MeasurementContext ctx, std::map<Label, std::vector<double>> rows) {
    for (const auto& [l, r] : rows) {
        if (std::find(labels_.begin(), labels_.end(), l) == labels_.end())
            throw Error(ErrorKind::InvalidArgument, "table uses undeclared label '" + l + "'");
        check_row(r, ctx.outcome_count());
    }
    if (find_table(ctx)) throw Error(ErrorKind::InvalidArgument, "duplicate table for one context");
    tables_.push_back({std::move(ctx), std::move(rows)});
}

const TabularModel::TableEntry* TabularModel::find_table(const MeasurementContext& ctx) const {
    for (const auto& t : tables_)
        if (t.context.same_as(ctx)) return &t;
    return nullptr;
}

StateMeasure TabularModel::measure_of(const State& psi) const {
    for (const auto& m : measures_) {
        if (m.state.dimension() != psi.dimension()) continue;
        if (1.0 - std::abs(qcore::inner(m.state, psi)) <= kSameState) return m.measure;
    }
    throw Error(ErrorKind::UncoveredContext, "model '" + name_ + "' has no measure for this state");
}

std::vector<double> TabularModel::row(const MeasurementContext& ctx, const Label& label) const {
    const auto* t = find_table(ctx);
    if (!t) throw Error(ErrorKind::UncoveredContext, "model '" + name_ + "' has no table for this context");
    auto it = t->rows.find(label);
    if (it == t->rows.end()) throw Error(ErrorKind::UncoveredContext, "table has no row for label '" + label + "'");
    return it->second;
}

std::vector<Label> TabularModel::labels_for(const MeasurementContext& ctx) const {
    const auto* t = find_table(ctx);
    if (!t) throw Error(ErrorKind::UncoveredContext, "model '" + name_ + "' has no table for this context");
    std::vector<Label> out;
    for (const auto& l : labels_)
        if (t->rows.count(l)) out.push_back(l);
    return out;
}

TabularModel TabularModel::from_json(const json& j) {
    try {
        TabularModel m(j.value("name", std::string("tabular")));
        if (!j.contains("lambda")) throw Error(ErrorKind::Parse, "missing key 'lambda'");
        for (const auto& l : j.at("lambda")) m.add_label(l.get<std::string>());
        if (j.contains("measures")) {
            for (const auto& e : j.at("measures")) {
                std::vector<std::pair<Label, double>> w;
                for (const auto& [l, p] : e.at("support").items()) w.emplace_back(l, p.get<double>());
                m.add_measure(qcore::state_from_json(e.at("state")), StateMeasure(std::move(w)));
            }
        }
        if (j.contains("tables")) {
            for (const auto& t : j.at("tables")) {
                json cj = t.at("context");
                json ctx_json = json::object();
                ctx_json["entries"] = cj.is_array() ? cj : json::array({cj});
                if (t.contains("dims")) ctx_json["dims"] = t.at("dims");
                auto ctx = qcore::context_from_json(ctx_json);
                std::map<Label, std::vector<double>> rows;
                for (const auto& [l, r] : t.at("rows").items()) rows[l] = parse_row(r, ctx);
                m.add_table(std::move(ctx), std::move(rows));
            }
        }
        return m;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("model JSON: ") + e.what());
    }
}

TabularModel TabularModel::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Parse, "cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, "'" + path + "': " + e.what());
    }
    return from_json(j);
}

json TabularModel::to_json() const {
    json j;
    j["name"] = name_;
    j["lambda"] = labels_;
    json ms = json::array();
    for (const auto& m : measures_) {
        json sup = json::object();
        for (const auto& [l, w] : m.measure.weights()) sup[l] = w;
        ms.push_back({{"state", qcore::state_to_json(m.state)}, {"support", sup}});
    }
    j["measures"] = ms;
    json ts = json::array();
    for (const auto& t : tables_) {
        auto cj = qcore::context_to_json(t.context);
        json rows = json::object();
        for (const auto& [l, r] : t.rows) rows[l] = r;
        ts.push_back({{"dims", cj["dims"]}, {"context", cj["entries"]}, {"rows", rows}});
    }
    j["tables"] = ts;
    return j;
}

}  // namespace crq::hvmodel
