#include "crq/chainbell/chainbell.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "crq/hvmodel/checks.hpp"
#include "crq/hvmodel/conditioning.hpp"
#include "crq/qcore/born.hpp"

namespace crq::chainbell {

using hvmodel::AxiomViolation;
using hvmodel::ConditionalTable;
using hvmodel::DeviationTracker;
using qcore::ContextEntry;
using qcore::Party;

namespace {

using ObservableFn = std::function<Observable(int)>;

Eigen::MatrixXcd ket_bra(const State& s) {
    auto v = s.to_dense();
    Eigen::VectorXcd x(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i];
    return x * x.adjoint();
}

double prob(const std::vector<double>& row, const MeasurementContext& ctx, double x, double y) {
    std::vector<double> v{x, y};
    auto idx = ctx.outcome_index(v);
    return idx ? row[*idx] : 0.0;
}

double prob1(const std::vector<double>& row, const MeasurementContext& ctx, double x) {
    std::vector<double> v{x};
    auto idx = ctx.outcome_index(v);
    return idx ? row[*idx] : 0.0;
}

// Contribution of one chain term from a joint row with outcomes in {+1, -1}.
double term_value(const ChainTerm& t, const std::vector<double>& row, const MeasurementContext& ctx) {
    double same = prob(row, ctx, 1, 1) + prob(row, ctx, -1, -1);
    double diff = prob(row, ctx, 1, -1) + prob(row, ctx, -1, 1);
    return t.equal ? same : diff;
}

ChainCertificate run_chain(const std::string& name, const HiddenVariableModel& model, const State& psi,
                           const ObservableFn& obs, int n, bool condition, double tol) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "chain length N must be at least 1");
    const Dims dims = psi.dims();
    auto terms = chain_terms(n);
    auto mu = model.measure_of(psi);
    std::vector<MeasurementContext> contexts;
    std::vector<Certificate> pis;
    for (const auto& t : terms) {
        contexts.push_back(chain_context(obs(t.a), obs(t.b)));
        if (contexts.back().dims() != dims) contexts.back() = MeasurementContext(dims, contexts.back().entries());
        pis.push_back(hvmodel::check_pi(model, contexts.back(), tol));
    }
    auto pi = Certificate::all_of("PI", pis);
    if (!pi.passed) throw AxiomViolation("PI", pi);

    ChainCertificate out;
    out.n = n;
    out.quantum_value = chained_bell_closed_form(n);
    out.half_bound = out.quantum_value / 2.0;

    const auto x0 = single_context(obs(0), 0);
    std::vector<Label> support = mu.support();

    auto event = [](const MeasurementContext& ctx) {
        return [&ctx](const std::vector<std::size_t>& idx) {
            for (std::size_t k = 0; k < idx.size(); ++k)
                if (std::abs(std::abs(ctx.entries()[k].observable.eigenvalues()[idx[k]]) - 1.0) > 1e-9) return false;
            return true;
        };
    };

    // tables over the support, one per chain context
    std::vector<ConditionalTable> tables;
    for (const auto& ctx : contexts) {
        auto table = model.table_of(ctx, support);
        tables.push_back(condition ? hvmodel::condition_table(table, event(ctx)) : table);
    }
    const auto x0_table = model.table_of(x0, support);

    DeviationTracker per_lambda, cancel;
    double integral = 0.0;
    DeviationTracker integral_at;
    for (std::size_t s = 0; s < support.size(); ++s) {
        LambdaReport r;
        r.label = support[s];
        r.weight = mu.weight(r.label);
        r.p_plus = prob1(x0_table.row(s), x0, 1);
        r.p_minus = prob1(x0_table.row(s), x0, -1);

        // term 0 is P(X_0 = Y_{2N-1}); term 1 is P(X_0 != Y_1)
        std::size_t ref = 1 < terms.size() ? 1 : 0;
        if (condition) {
            auto raw = model.row(contexts[ref], r.label);
            double mass = 0.0;
            for (std::size_t f = 0; f < raw.size(); ++f)
                if (event(contexts[ref])(contexts[ref].unflatten(f))) mass += raw[f];
            r.event_probability = mass;
            r.degenerate = tables[ref].degenerate(s);
        }
        double plus = r.p_plus, minus = r.p_minus;
        if (condition) {
            auto marg = qcore::marginalize(contexts[ref], tables[ref].row(s), {0});
            plus = prob1(marg, single_context(obs(0), 0), 1);
            minus = prob1(marg, single_context(obs(0), 0), -1);
        }
        for (std::size_t t = 0; t < terms.size(); ++t) r.chain_value += term_value(terms[t], tables[t].row(s), contexts[t]);
        r.difference = std::abs(plus - minus);

        double excess = r.degenerate ? 0.0 : std::max(0.0, r.difference - r.chain_value);
        per_lambda.observe(excess, r.label, "", "(X_0)");
        r.passed = excess <= tol;
        if (condition) {
            double raw_diff = std::abs(r.p_plus - r.p_minus);
            cancel.observe(raw_diff, r.label, "", "(X_0)");
            r.passed = r.passed && raw_diff <= out.quantum_value + tol;
        }
        if (!r.degenerate) {
            integral += r.weight * r.difference;
            integral_at.observe(r.weight * r.difference, r.label, "", "(X_0)");
            out.max_half_deviation = std::max(out.max_half_deviation, std::abs(plus - 0.5));
            out.max_half_deviation = std::max(out.max_half_deviation, std::abs(minus - 0.5));
        }
        out.per_lambda.push_back(std::move(r));
    }

    std::vector<Certificate> parts{pi};
    parts.push_back(Certificate::make(name + ":per-lambda chain", per_lambda.worst(), tol,
                                      per_lambda.witness("|P(X_0=1|l) - P(X_0=-1|l)| exceeds I(l)")));
    parts.push_back(Certificate::make(name + ":integral", integral, out.quantum_value + tol,
                                      integral_at.witness("mu-integral of |P(X_0=1|l) - P(X_0=-1|l)| exceeds I of the Bell state")));
    if (condition)
        parts.push_back(Certificate::make(name + ":cancellation", cancel.worst(), out.quantum_value + tol,
                                          cancel.witness("unconditioned P(X_0=1|l) and P(X_0=-1|l) differ")));
    out.certificate = Certificate::all_of(name, std::move(parts));
    return out;
}

}  // namespace

State theta_state(double theta) {
    return State::from_dense({2}, {Complex{std::sin(theta / 2.0), 0.0}, Complex{std::cos(theta / 2.0), 0.0}});
}

double theta_k(int k, int n) { return k * std::numbers::pi / (2.0 * n); }

Observable z_operator(int k, int n) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "N must be at least 1");
    double th = theta_k(k, n);
    Eigen::MatrixXcd m = ket_bra(theta_state(th + std::numbers::pi)) - ket_bra(theta_state(th));
    return Observable(m);
}

State bell_state(const std::vector<double>& c) {
    if (c.empty()) throw Error(ErrorKind::InvalidArgument, "no coefficients");
    const Index l = c.size();
    double s = 0.0;
    std::vector<qcore::Entry> entries;
    for (Index i = 0; i < l; ++i) {
        if (!(c[i] >= 0.0)) throw Error(ErrorKind::InvalidArgument, "coefficients must be nonnegative");
        s += c[i] * c[i];
        if (c[i] > 0.0) entries.push_back({i * l + i, Complex{c[i], 0.0}});
    }
    if (std::abs(s - 1.0) > 1e-12) throw Error(ErrorKind::NotNormalized, "coefficients: sum of squares is not 1");
    return State({l, l}, std::move(entries));
}

std::vector<ChainTerm> chain_terms(int n) {
    std::vector<ChainTerm> t;
    t.push_back({0, 2 * n - 1, true});
    for (int b = 1; b < 2 * n; b += 2) {
        t.push_back({b - 1, b, false});
        if (b + 1 <= 2 * n - 2) t.push_back({b + 1, b, false});
    }
    return t;
}

MeasurementContext chain_context(const Observable& x, const Observable& y) {
    std::vector<ContextEntry> e;
    e.push_back({x, {0}, Party::A});
    e.push_back({y, {1}, Party::B});
    return MeasurementContext({x.dim(), y.dim()}, std::move(e));
}

MeasurementContext single_context(const Observable& x, std::size_t factor) {
    return MeasurementContext::single({x.dim(), x.dim()}, x, {factor}, factor == 0 ? Party::A : Party::B);
}

double chained_bell_quantum(int n) {
    State psi = bell_state({std::sqrt(0.5), std::sqrt(0.5)});
    double total = 0.0;
    for (const auto& t : chain_terms(n)) {
        auto ctx = chain_context(z_operator(t.a, n), z_operator(t.b, n));
        total += term_value(t, qcore::born_distribution(psi, ctx), ctx);
    }
    return total;
}

double chained_bell_closed_form(int n) {
    // extended precision so that N = 1 rounds to exactly 1
    const long double s = std::sin(std::numbers::pi_v<long double> / (4.0L * n));
    return static_cast<double>(2.0L * n * s * s);
}

double chained_bell_hv(const HiddenVariableModel& model, int n, const Label& label) {
    double total = 0.0;
    for (const auto& t : chain_terms(n)) {
        auto ctx = chain_context(z_operator(t.a, n), z_operator(t.b, n));
        total += term_value(t, model.row(ctx, label), ctx);
    }
    return total;
}

nlohmann::ordered_json to_json(const ChainCertificate& c) {
    nlohmann::ordered_json j;
    j["certificate"] = hvmodel::to_json(c.certificate);
    j["N"] = c.n;
    j["quantum_value"] = c.quantum_value;
    j["max_half_deviation"] = c.max_half_deviation;
    j["half_bound"] = c.half_bound;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : c.per_lambda) {
        nlohmann::ordered_json x;
        x["label"] = r.label;
        x["weight"] = r.weight;
        x["p_plus"] = r.p_plus;
        x["p_minus"] = r.p_minus;
        x["chain_value"] = r.chain_value;
        x["difference"] = r.difference;
        x["event_probability"] = r.event_probability;
        x["degenerate"] = r.degenerate;
        x["passed"] = r.passed;
        rows.push_back(x);
    }
    j["per_lambda"] = rows;
    return j;
}

ChainCertificate step1_certificate(const HiddenVariableModel& model, int n, double tol) {
    State psi = bell_state({std::sqrt(0.5), std::sqrt(0.5)});
    return run_chain("Step1", model, psi, [n](int k) { return z_operator(k, n); }, n, false, tol);
}

std::vector<double> default_base(std::size_t l, std::pair<std::size_t, std::size_t> pair) {
    std::vector<double> v(l);
    for (std::size_t i = 0; i < l; ++i) v[i] = 2.0 + static_cast<double>(i);
    v.at(pair.first) = 1.0;
    v.at(pair.second) = -1.0;
    return v;
}

Observable pair_observable(int k, int n, std::size_t l, std::pair<std::size_t, std::size_t> pair,
                           const std::vector<double>& base) {
    if (base.size() != l) throw Error(ErrorKind::DimensionMismatch, "base eigenvalue count");
    const auto [a, b] = pair;
    if (a >= l || b >= l || a == b) throw Error(ErrorKind::InvalidArgument, "bad index pair");
    for (std::size_t i = 0; i < l; ++i)
        if (i != a && i != b && std::abs(std::abs(base[i]) - 1.0) < 1e-6)
            throw Error(ErrorKind::InvalidArgument, "eigenvalues outside the pair must avoid +-1");
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(l));
    for (std::size_t i = 0; i < l; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = base[i];
    const Eigen::MatrixXcd z = z_operator(k, n).matrix();
    const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
    m(ia, ia) = z(0, 0);
    m(ia, ib) = z(0, 1);
    m(ib, ia) = z(1, 0);
    m(ib, ib) = z(1, 1);
    return Observable(m);
}

ChainCertificate step2_certificate(const HiddenVariableModel& model, const std::vector<double>& c,
                                   std::pair<std::size_t, std::size_t> pair, int n, double tol,
                                   std::optional<std::vector<double>> base) {
    const std::size_t l = c.size();
    if (pair.first >= l || pair.second >= l || pair.first == pair.second)
        throw Error(ErrorKind::InvalidArgument, "bad index pair");
    if (std::abs(c[pair.first] - c[pair.second]) > 1e-12)
        throw Error(ErrorKind::CoefficientMismatch, "the chosen pair has different coefficients");
    State psi = bell_state(c);
    std::vector<double> values = base ? *base : default_base(l, pair);
    std::vector<Observable> cache;
    for (int k = 0; k < 2 * n; ++k) cache.push_back(pair_observable(k, n, l, pair, values));
    return run_chain("Step2", model, psi, [&cache](int k) { return cache.at(static_cast<std::size_t>(k)); }, n, true,
                     tol);
}

}  // namespace crq::chainbell
