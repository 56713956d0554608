#include "crq/hvmodel/checks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "crq/qcore/born.hpp"

namespace crq::hvmodel {

using qcore::ContextEntry;
using qcore::Entry;
using qcore::Party;

namespace {

struct RowDiff {
    double dev = 0.0;
    std::size_t at = 0;
};

RowDiff row_diff(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw Error(ErrorKind::DimensionMismatch, "compared rows differ in length");
    RowDiff d;
    for (std::size_t k = 0; k < x.size(); ++k) {
        double v = std::abs(x[k] - y[k]);
        if (v > d.dev || std::isnan(v)) {
            d.dev = std::isnan(v) ? INFINITY : v;
            d.at = k;
        }
    }
    return d;
}

std::string outcome_name(const MeasurementContext& ctx, std::size_t flat) {
    return format_outcome(ctx.outcome_values(flat));
}

std::vector<std::size_t> factors_of(const Unitary& u) {
    if (u.kind() == Unitary::Kind::Identity) return {};
    if (u.kind() == Unitary::Kind::FactorPermutation)
        throw Error(ErrorKind::InvalidArgument, "a factor permutation is not a local unitary");
    return u.factors();
}

bool disjoint(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    for (std::size_t x : a)
        if (std::find(b.begin(), b.end(), x) != b.end()) return false;
    return true;
}

// PI-style consistency of a joint {X, Y} context on the given labels.
void marginal_consistency(const HiddenVariableModel& model, const MeasurementContext& joint,
                          const std::vector<Label>& labels, DeviationTracker& tracker) {
    auto cx = joint.sub_context({0});
    auto cy = joint.sub_context({1});
    for (const auto& l : labels) {
        auto jr = model.row(joint, l);
        auto dx = row_diff(qcore::marginalize(joint, jr, {0}), model.row(cx, l));
        tracker.observe(dx.dev, l, "", "A:" + outcome_name(cx, dx.at));
        auto dy = row_diff(qcore::marginalize(joint, jr, {1}), model.row(cy, l));
        tracker.observe(dy.dev, l, "", "B:" + outcome_name(cy, dy.at));
    }
}

}  // namespace

Certificate compare_on_supports(const std::string& name, const HiddenVariableModel& model, const State& a,
                                const MeasurementContext& ctx_a, const State& b, const MeasurementContext& ctx_b,
                                double bound) {
    if (ctx_a.total_dimension() != a.dimension() || ctx_b.total_dimension() != b.dimension())
        throw Error(ErrorKind::DimensionMismatch, name + ": context and state dimensions differ");
    auto sa = model.measure_of(a).support();
    auto sb = model.measure_of(b).support();
    std::set<Label> in_a(sa.begin(), sa.end()), in_b(sb.begin(), sb.end());
    std::vector<Label> both, only_a, only_b;
    for (const auto& l : sa) (in_b.count(l) ? both : only_a).push_back(l);
    for (const auto& l : sb)
        if (!in_a.count(l)) only_b.push_back(l);

    std::map<Label, std::vector<double>> rows_a, rows_b;
    auto ra = [&](const Label& l) -> const std::vector<double>& {
        auto it = rows_a.find(l);
        if (it == rows_a.end()) it = rows_a.emplace(l, model.row(ctx_a, l)).first;
        return it->second;
    };
    auto rb = [&](const Label& l) -> const std::vector<double>& {
        auto it = rows_b.find(l);
        if (it == rows_b.end()) it = rows_b.emplace(l, model.row(ctx_b, l)).first;
        return it->second;
    };

    DeviationTracker t;
    for (const auto& l : both) {
        auto d = row_diff(ra(l), rb(l));
        t.observe(d.dev, l, l, outcome_name(ctx_a, d.at));
    }
    if (!only_a.empty() && !only_b.empty()) {
        for (const auto& l : only_a)
            for (const auto& m : only_b) {
                auto d = row_diff(ra(l), rb(m));
                t.observe(d.dev, l, m, outcome_name(ctx_a, d.at));
            }
    }
    return Certificate::make(name, t.worst(), bound, t.witness("largest table difference between the two states"));
}

Certificate check_cq(const HiddenVariableModel& model, const State& psi, const MeasurementContext& ctx, double tol) {
    if (ctx.total_dimension() != psi.dimension())
        throw Error(ErrorKind::DimensionMismatch, "CQ: context and state dimensions differ");
    auto mu = model.measure_of(psi);
    auto born = qcore::born_distribution(psi, ctx);
    std::vector<double> avg(born.size(), 0.0);
    std::vector<std::pair<Label, std::vector<double>>> rows;
    for (const auto& [l, w] : mu.weights()) {
        auto r = model.row(ctx, l);
        if (r.size() != avg.size()) throw Error(ErrorKind::DimensionMismatch, "CQ: row length");
        for (std::size_t k = 0; k < r.size(); ++k) avg[k] += w * r[k];
        rows.emplace_back(l, std::move(r));
    }
    auto d = row_diff(avg, born);
    std::optional<Witness> w;
    if (!rows.empty()) {
        std::size_t best = 0;
        double gap = -1.0;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            double g = std::abs(rows[k].second[d.at] - born[d.at]);
            if (g > gap) {
                gap = g;
                best = k;
            }
        }
        w = Witness{rows[best].first, "", outcome_name(ctx, d.at),
                    "averaged table differs from the Born probability"};
    }
    return Certificate::make("CQ", d.dev, tol, std::move(w));
}

Certificate check_ui(const HiddenVariableModel& model, const State& psi, const Unitary& u,
                     const MeasurementContext& ctx, double tol) {
    State upsi = u.apply(psi);
    MeasurementContext back = u.conjugate(ctx);
    return compare_on_supports("UI", model, upsi, ctx, psi, back, tol);
}

Certificate check_cp(const HiddenVariableModel& model, const State& psi, const State& phi,
                     const MeasurementContext& ctx, double k, double tol) {
    if (!(k >= 0.0)) throw Error(ErrorKind::InvalidArgument, "CP constant must be nonnegative");
    double eps = qcore::overlap_epsilon(psi, phi);
    return compare_on_supports("CP", model, psi, ctx, phi, ctx, k * std::sqrt(eps) + tol);
}

Certificate check_pi(const HiddenVariableModel& model, const MeasurementContext& joint, double tol) {
    if (joint.size() != 2) throw Error(ErrorKind::MalformedContext, "PI needs exactly two entries");
    auto a = joint.entry_for_party(Party::A);
    auto b = joint.entry_for_party(Party::B);
    if (!a || !b) throw Error(ErrorKind::MalformedContext, "PI needs one party-A and one party-B entry");
    if (!disjoint(joint.entries()[*a].factors, joint.entries()[*b].factors))
        throw Error(ErrorKind::MalformedContext, "party observables share a factor");
    auto ca = joint.sub_context({*a});
    auto cb = joint.sub_context({*b});
    DeviationTracker t;
    for (const auto& l : model.labels_for(joint)) {
        auto jr = model.row(joint, l);
        auto da = row_diff(qcore::marginalize(joint, jr, {*a}), model.row(ca, l));
        t.observe(da.dev, l, "", "A:" + outcome_name(ca, da.at));
        auto db = row_diff(qcore::marginalize(joint, jr, {*b}), model.row(cb, l));
        t.observe(db.dev, l, "", "B:" + outcome_name(cb, db.at));
    }
    return Certificate::make("PI", t.worst(), tol, t.witness("joint marginal differs from the single-party table"));
}

Certificate check_pe(const HiddenVariableModel& model, const State& psi1, const State& psi2,
                     const MeasurementContext& ctx, double tol) {
    if (ctx.total_dimension() != psi1.dimension())
        throw Error(ErrorKind::DimensionMismatch, "PE: context and state dimensions differ");
    if (psi2.dimension() == 1) return compare_on_supports("PE", model, psi1, ctx, psi1, ctx, tol);
    State prod = psi1.dims() == ctx.dims() ? psi1.tensor(psi2) : psi1.reshaped(ctx.dims()).tensor(psi2);
    return compare_on_supports("PE", model, psi1, ctx, prod, ctx.extended(psi2.dims()), tol);
}

State linear_sum(const std::vector<State>& e, const std::vector<double>& c) {
    if (e.empty() || e.size() != c.size()) throw Error(ErrorKind::DimensionMismatch, "coefficient count");
    std::map<Index, Complex> acc;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i].dimension() != e[0].dimension()) throw Error(ErrorKind::DimensionMismatch, "family dimensions differ");
        if (c[i] == 0.0) continue;
        for (const auto& x : e[i].entries()) acc[x.index] += c[i] * x.amp;
    }
    std::vector<Entry> entries;
    for (const auto& [i, a] : acc)
        if (a != Complex{}) entries.push_back({i, a});
    return State(e[0].dims(), std::move(entries));
}

State schmidt_sum(const std::vector<State>& e, const std::vector<double>& c, const std::vector<State>& u) {
    if (e.empty() || e.size() != c.size() || e.size() != u.size())
        throw Error(ErrorKind::DimensionMismatch, "Schmidt family sizes differ");
    std::vector<State> prods;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (u[i].dimension() != u[0].dimension()) throw Error(ErrorKind::DimensionMismatch, "partner dimensions differ");
        prods.push_back(e[i].tensor(u[i]).flattened());
    }
    return linear_sum(prods, c);
}

Certificate check_se(const HiddenVariableModel& model, const MeasurementContext& ctx, const std::vector<State>& e,
                     const std::vector<double>& c, const std::vector<State>& u, double tol) {
    if (e.empty() || e.size() != c.size() || e.size() != u.size())
        throw Error(ErrorKind::DimensionMismatch, "SE: family sizes differ");
    double s = 0.0;
    for (double x : c) {
        if (!(x >= 0.0)) throw Error(ErrorKind::InvalidArgument, "SE coefficients must be nonnegative");
        s += x * x;
    }
    if (std::abs(s - 1.0) > 1e-12) throw Error(ErrorKind::NotNormalized, "SE coefficients: sum of squares is not 1");
    std::vector<State> ek, uk;
    std::vector<double> ck;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (c[i] == 0.0) continue;
        ek.push_back(e[i]);
        uk.push_back(u[i]);
        ck.push_back(c[i]);
    }
    const double kOrtho = 1e-9;
    for (std::size_t i = 0; i < ek.size(); ++i) {
        if (ek[i].dimension() != ctx.total_dimension())
            throw Error(ErrorKind::DimensionMismatch, "SE: eigenstate and context dimensions differ");
        auto dist = qcore::born_distribution(ek[i], ctx);
        if (*std::max_element(dist.begin(), dist.end()) < 1.0 - kOrtho)
            throw Error(ErrorKind::InvalidArgument, "SE: e_" + std::to_string(i) + " is not an eigenstate of the context");
        for (std::size_t j = i + 1; j < ek.size(); ++j) {
            if (std::abs(qcore::inner(ek[i], ek[j])) > kOrtho)
                throw Error(ErrorKind::NotOrthonormal, "SE: eigenstates are not orthogonal");
            if (std::abs(qcore::inner(uk[i], uk[j])) > kOrtho)
                throw Error(ErrorKind::NotOrthonormal, "SE: partner states are not orthogonal");
        }
    }
    State lhs = linear_sum(ek, ck).reshaped(ctx.dims());
    State rhs = schmidt_sum(ek, ck, uk).reshaped([&] {
        Dims d = ctx.dims();
        d.insert(d.end(), uk[0].dims().begin(), uk[0].dims().end());
        return d;
    }());
    return compare_on_supports("SE", model, lhs, ctx, rhs, ctx.extended(uk[0].dims()), tol);
}

Certificate check_lemma1(const HiddenVariableModel& model, const State& psi, const Unitary& u1, const Unitary& u2,
                         const MeasurementContext& ctx_x, const MeasurementContext& ctx_y, double tol) {
    if (ctx_x.size() != 1 || ctx_y.size() != 1)
        throw Error(ErrorKind::MalformedContext, "Lemma 1 takes single-observable contexts");
    if (ctx_x.dims() != psi.dims() || ctx_y.dims() != psi.dims())
        throw Error(ErrorKind::DimensionMismatch, "Lemma 1 contexts must use the state's factor dims");
    const auto& fx = ctx_x.entries()[0].factors;
    const auto& fy = ctx_y.entries()[0].factors;
    auto f1 = factors_of(u1);
    auto f2 = factors_of(u2);
    if (!disjoint(fx, fy)) throw Error(ErrorKind::FactorMismatch, "X and Y share a factor");
    if (!disjoint(f1, fy)) throw Error(ErrorKind::FactorMismatch, "U1 acts on a factor of Y");
    if (!disjoint(f2, fx)) throw Error(ErrorKind::FactorMismatch, "U2 acts on a factor of X");
    if (!disjoint(f1, f2)) throw Error(ErrorKind::FactorMismatch, "U1 and U2 share a factor");

    State s1 = u1.apply(psi);
    State s2 = u2.apply(psi);
    auto part1 = compare_on_supports("Lemma1:Y under U1", model, s1, ctx_y, psi, ctx_y, tol);
    auto part2 = compare_on_supports("Lemma1:X under U2", model, s2, ctx_x, psi, ctx_x, tol);

    std::vector<ContextEntry> je{ctx_x.entries()[0], ctx_y.entries()[0]};
    je[0].party = Party::A;
    je[1].party = Party::B;
    MeasurementContext joint(psi.dims(), std::move(je));
    std::vector<Label> labels;
    for (const State* s : std::vector<const State*>{&psi, &s1, &s2})
        for (const auto& l : model.measure_of(*s).support())
            if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
    DeviationTracker t;
    marginal_consistency(model, joint, labels, t);
    auto part3 = Certificate::make("Lemma1:joint marginals", t.worst(), tol,
                                   t.witness("joint {X,Y} marginal differs from the single-party table"));
    return Certificate::all_of("Lemma1", {part1, part2, part3});
}

}  // namespace crq::hvmodel
