#include "support/fixtures.hpp"

#include <algorithm>
#include <cmath>

#include "crq/qcore/born.hpp"

namespace crq::testing {

using qcore::Party;

namespace {

const char* kChaos = "chaos";

std::pair<Label, bool> split_label(const Label& l) {
    if (l.size() > 2 && l[l.size() - 2] == '/') return {l.substr(0, l.size() - 2), l.back() == '+'};
    throw Error(ErrorKind::InvalidArgument, "not a split label: " + l);
}

}  // namespace

std::vector<Label> PerturbedMeasureModel::labels() const {
    auto l = born_.labels();
    l.push_back(kChaos);
    return l;
}

StateMeasure PerturbedMeasureModel::measure_of(const State& psi) const {
    auto b = born_.measure_of(psi);
    return StateMeasure({{b.support().front(), 1.0 - w_}, {kChaos, w_}});
}

std::vector<double> PerturbedMeasureModel::row(const MeasurementContext& ctx, const Label& label) const {
    if (label == kChaos) {
        const auto k = ctx.outcome_count();
        return std::vector<double>(k, 1.0 / static_cast<double>(k));
    }
    return born_.row(ctx, label);
}

std::vector<Label> PerturbedMeasureModel::labels_for(const MeasurementContext& ctx) const {
    auto l = born_.labels_for(ctx);
    l.push_back(kChaos);
    return l;
}

SignalingModel::SignalingModel(double delta, Predicate signals)
    : delta_(delta), signals_(signals ? std::move(signals) : Predicate(signals_on_nondiagonal_b)) {}

std::vector<Label> SignalingModel::labels() const {
    std::vector<Label> out;
    for (const auto& l : born_.labels()) {
        out.push_back(l + "/+");
        out.push_back(l + "/-");
    }
    return out;
}

StateMeasure SignalingModel::measure_of(const State& psi) const {
    auto b = born_.measure_of(psi).support().front();
    return StateMeasure({{b + "/+", 0.5}, {b + "/-", 0.5}});
}

std::vector<double> SignalingModel::row(const MeasurementContext& ctx, const Label& label) const {
    auto [base, plus] = split_label(label);
    auto r = born_.row(ctx, base);
    if (!signals_(ctx)) return r;
    const auto a = *ctx.entry_for_party(Party::A);
    // two outcomes with different A values carrying the most mass
    std::size_t o1 = 0;
    for (std::size_t f = 1; f < r.size(); ++f)
        if (r[f] > r[o1]) o1 = f;
    std::size_t o2 = r.size();
    const auto a1 = ctx.unflatten(o1)[a];
    for (std::size_t f = 0; f < r.size(); ++f)
        if (ctx.unflatten(f)[a] != a1 && (o2 == r.size() || r[f] > r[o2])) o2 = f;
    if (o2 == r.size()) return r;
    const double t = std::min({delta_, r[o1], r[o2]});
    if (plus) {
        r[o1] -= t;
        r[o2] += t;
    } else {
        r[o1] += t;
        r[o2] -= t;
    }
    return r;
}

std::vector<Label> SignalingModel::labels_for(const MeasurementContext& ctx) const {
    std::vector<Label> out;
    for (const auto& l : born_.labels_for(ctx)) {
        out.push_back(l + "/+");
        out.push_back(l + "/-");
    }
    return out;
}

bool signals_on_nondiagonal_b(const MeasurementContext& ctx) {
    if (ctx.size() != 2) return false;
    auto a = ctx.entry_for_party(Party::A);
    auto b = ctx.entry_for_party(Party::B);
    return a && b && !ctx.entries()[*b].observable.is_diagonal();
}

SignalingModel::Predicate signals_on_large(std::size_t factors) {
    return [factors](const MeasurementContext& ctx) {
        return ctx.size() == 2 && ctx.entry_for_party(Party::A) && ctx.entry_for_party(Party::B) &&
               ctx.dims().size() >= factors;
    };
}

StateMeasure PredeterminedModel::measure_of(const State&) const {
    return StateMeasure({{"lambda+", 0.5}, {"lambda-", 0.5}});
}

std::vector<double> PredeterminedModel::row(const MeasurementContext& ctx, const Label& label) const {
    if (ctx.total_dimension() != 4) throw Error(ErrorKind::UncoveredContext, "predetermined model lives on C^2 (x) C^2");
    const double v = label == "lambda+" ? 1.0 : label == "lambda-" ? -1.0 : 0.0;
    if (v == 0.0) throw Error(ErrorKind::InvalidArgument, "unknown label " + label);
    std::vector<double> vals;
    for (const auto& e : ctx.entries()) {
        const auto& ev = e.observable.eigenvalues();
        if (ev.size() != 2 || std::abs(ev[0] + 1.0) > 1e-9 || std::abs(ev[1] - 1.0) > 1e-9)
            throw Error(ErrorKind::UncoveredContext, "predetermined model only answers +-1 observables");
        vals.push_back(v);
    }
    std::vector<double> r(ctx.outcome_count(), 0.0);
    r[*ctx.outcome_index(vals)] = 1.0;
    return r;
}

std::vector<double> TwistedModel::row(const MeasurementContext& ctx, const Label& label) const {
    auto r = born_.row(ctx, label);
    if (twist_(*born_.state_of(label), ctx)) std::reverse(r.begin(), r.end());
    return r;
}

std::unique_ptr<TwistedModel> conjugation_blind_model() {
    return std::make_unique<TwistedModel>("conjugation-blind", [](const State&, const MeasurementContext& ctx) {
        for (const auto& e : ctx.entries())
            if (!e.observable.is_diagonal()) return true;
        return false;
    });
}

std::unique_ptr<TwistedModel> cp_jump_model(State reference) {
    return std::make_unique<TwistedModel>("cp-jump", [ref = std::move(reference)](const State& s, const MeasurementContext&) {
        if (s.dimension() != ref.dimension()) return false;
        double o = std::abs(qcore::inner(ref, s.reshaped(ref.dims())));
        return o < 1.0 - 1e-9 && o > 0.9;
    });
}

std::unique_ptr<TwistedModel> dimension_jump_model(Index dim) {
    return std::make_unique<TwistedModel>("dimension-jump",
                                          [dim](const State& s, const MeasurementContext&) { return s.dimension() > dim; });
}

std::string fixture_path(const std::string& name) { return std::string(CRQ_FIXTURE_DIR) + "/" + name; }

}  // namespace crq::testing
