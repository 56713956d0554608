#include "crq/pipeline/theorem.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "crq/embezzle/embezzle.hpp"
#include "crq/hvmodel/checks.hpp"
#include "crq/qcore/born.hpp"
#include "crq/qcore/context.hpp"

namespace crq::pipeline {

using hvmodel::AxiomViolation;
using hvmodel::DeviationTracker;
using qcore::ContextEntry;
using qcore::Entry;
using qcore::MeasurementContext;
using qcore::Party;

namespace {

struct Eigenbasis {
    std::vector<double> values;
    Eigen::MatrixXcd v;          // columns e_i with phases making <e_i, psi> >= 0
    std::vector<double> c;       // |<e_i, psi>|, entries below 1e-12 set to 0 and renormalized
    std::vector<double> born;    // |<e_i, psi>|^2
};

Eigenbasis eigenbasis(const State& psi, const Observable& z) {
    if (z.dim() != psi.dimension()) throw Error(ErrorKind::DimensionMismatch, "Z and psi dimensions differ");
    if (z.outcome_count() != z.dim()) throw Error(ErrorKind::Unsupported, "step 3 needs a nondegenerate Z");
    Eigenbasis eb;
    eb.values = z.eigenvalues();
    eb.v = z.eigenvectors();
    auto dense = psi.to_dense();
    Eigen::VectorXcd x = Eigen::Map<const Eigen::VectorXcd>(dense.data(), static_cast<Eigen::Index>(dense.size()));
    double s = 0.0;
    for (Eigen::Index i = 0; i < eb.v.cols(); ++i) {
        Complex a = eb.v.col(i).dot(x);
        double r = std::abs(a);
        eb.born.push_back(r * r);
        if (r > 0.0) eb.v.col(i) *= a / r;
        if (r < 1e-12) r = 0.0;
        eb.c.push_back(r);
        s += r * r;
    }
    for (double& c : eb.c) c /= std::sqrt(s);
    return eb;
}

Certificate named(const std::string& link, Certificate c) {
    c.check_name = link + " [" + c.check_name + "]";
    return c;
}

class LinkRunner {
public:
    void add(const std::string& link, Certificate c) {
        c = named(link, std::move(c));
        links_.push_back(c);
        if (!c.passed) throw AxiomViolation(link, c);
    }
    std::vector<Certificate> take() { return std::move(links_); }

private:
    std::vector<Certificate> links_;
};

std::vector<Label> support_of(const HiddenVariableModel& model, const State& s) {
    return model.measure_of(s).support();
}

Observable w_observable(Index l, Index m) {
    std::vector<double> v(l * m);
    for (Index w = 0; w < l * m; ++w) v[w] = 1.0 + static_cast<double>(w);
    return Observable::diagonal(v);
}

double predicted_overlap(const std::vector<double>& c, const RationalApprox& a, const std::vector<Index>& mi, Index m,
                         int e, std::map<Index, double>& cache) {
    double s = 0.0;
    for (std::size_t t = 0; t < c.size(); ++t) {
        auto it = cache.find(mi[t]);
        if (it == cache.end())
            it = cache.emplace(mi[t], embezzle::embezzlement_fidelity(embezzle::EmbezzleConfig::make(m, e, mi[t])))
                     .first;
        s += c[t] * a.c_prime[t] * it->second;
    }
    return s;
}

}  // namespace

std::pair<int, bool> choose_embezzle_exp(const std::vector<double>& c_support, const RationalApprox& approx, Index m,
                                         std::size_t l, double eps, std::uint64_t max_nonzeros, int max_exp) {
    auto mi = approx.reduced_m();
    std::uint64_t sum_m = 0;
    for (auto v : mi) sum_m += v;
    if (m == 1) return {1, false};
    int best = 0;
    for (int e = 1; e <= max_exp; ++e) {
        if (key_state_size(m, e, sum_m, l) > max_nonzeros) break;
        best = e;
        std::map<Index, double> cache;
        if (predicted_overlap(c_support, approx, mi, m, e, cache) >= 1.0 - eps) return {e, false};
    }
    if (best == 0)
        throw Error(ErrorKind::DimensionBudgetExceeded,
                    "key states exceed " + std::to_string(max_nonzeros) + " nonzeros even for N = 1");
    return {best, true};
}

TheoremCertificate step3_certificate(const HiddenVariableModel& model, const State& psi_in, const Observable& z,
                                     const TheoremOptions& opts) {
    if (!(opts.epsilon > 0.0 && opts.epsilon < 1.0)) throw Error(ErrorKind::InvalidArgument, "need 0 < epsilon < 1");
    if (opts.chain_n < 1) throw Error(ErrorKind::InvalidArgument, "need N >= 1");
    const double tol = opts.tol;
    const State psi = psi_in.flattened();
    const Eigenbasis eb = eigenbasis(psi, z);
    const std::size_t l = eb.c.size();
    const Index L = static_cast<Index>(l);
    const Observable zdiag = Observable::diagonal(eb.values);
    const MeasurementContext ctx_z = MeasurementContext::whole(z);
    const MeasurementContext ctx_zdiag = MeasurementContext::whole(zdiag);
    LinkRunner run;

    // L0: move to the eigenbasis and drop components with zero coefficient
    auto u0 = qcore::Unitary::whole(eb.v.adjoint());
    run.add("L0 eigenbasis", hvmodel::check_ui(model, psi, u0, ctx_zdiag, tol));
    State psi_eig = u0.apply(psi);
    std::vector<std::size_t> support;
    std::vector<double> c_support;
    std::vector<State> basis_l;
    for (std::size_t i = 0; i < l; ++i) {
        basis_l.push_back(State::basis({L}, i));
        if (eb.c[i] > 0.0) {
            support.push_back(i);
            c_support.push_back(eb.c[i]);
        }
    }
    State psi_c = hvmodel::linear_sum(basis_l, eb.c);
    run.add("L0 support", hvmodel::check_cp(model, psi_eig, psi_c, ctx_zdiag, opts.k_cp, tol));
    if (support.size() < l) run.add("L0 zero components", hvmodel::check_cq(model, psi, ctx_z, tol));

    // exact coefficients and the key states
    const double eps_support = opts.epsilon * static_cast<double>(support.size()) / static_cast<double>(l);
    RationalApprox approx = rational_approx(c_support, eps_support, opts.policy);
    auto reduced = approx.reduced_m();
    Index m = 1;
    std::uint64_t sum_m = 0;
    for (auto v : reduced) {
        m = std::max(m, v);
        sum_m += v;
    }
    auto [n_exp, capped] =
        choose_embezzle_exp(c_support, approx, m, l, opts.epsilon, opts.max_nonzeros, opts.max_embezzle_exp);
    KeyStates ks = build_key_states(eb.c, approx, n_exp, m, opts.max_nonzeros);
    const Index n = ks.n;
    const Dims& d6 = ks.dims;
    const double q = ks.q;

    const Observable wobs = w_observable(L, m);
    const MeasurementContext e_a = MeasurementContext::single(d6, zdiag, {kA}, Party::A);
    const MeasurementContext w_b = MeasurementContext::single(d6, wobs, {kB, kBprime}, Party::B);
    const MeasurementContext joint(d6, {e_a.entries()[0], w_b.entries()[0]});

    std::vector<Index> wsupport;  // xi^{ij} with j <= m_i
    for (std::size_t i : support)
        for (Index j = 0; j < ks.m_list[i]; ++j) wsupport.push_back(xi_index(i, j, m));
    const Index dw = L * m;

    // (q1) uniform superposition of the xi^{ij_i} on H_B (x) H'_B, via its Bell double and step 2
    {
        std::vector<State> e, u;
        std::vector<double> cq;
        for (Index w : wsupport) {
            e.push_back(State::basis({L, m}, w));
            u.push_back(State::basis({dw}, w));
            cq.push_back(q);
        }
        auto ctx_small = MeasurementContext::single({L, m}, wobs, {0, 1}, Party::B);
        run.add("q1 doubling", hvmodel::check_se(model, ctx_small, e, cq, u, tol));

        std::vector<double> cvec(dw, 0.0);
        for (Index w : wsupport) cvec[w] = q;
        State dbl = chainbell::bell_state(cvec);
        auto ctx_wd = MeasurementContext::single({dw, dw}, wobs, {0}, Party::A);
        std::map<Label, double> residual;
        for (std::size_t p = 0; p + 1 < wsupport.size(); ++p) {
            std::pair<std::size_t, std::size_t> pair{wsupport[p], wsupport[p + 1]};
            const std::string tag = "q1 step 2 (" + std::to_string(pair.first) + "," + std::to_string(pair.second) + ")";
            chainbell::ChainCertificate cc;
            try {
                cc = chainbell::step2_certificate(model, cvec, pair, opts.chain_n, tol);
            } catch (const AxiomViolation& ex) {
                run.add(tag, ex.certificate());
            }
            run.add(tag, cc.certificate);
            for (const auto& r : cc.per_lambda)
                if (!r.degenerate) residual[r.label] += r.chain_value * r.event_probability;

            // X_0 and W share their eigenvectors; their tables must agree after relabelling
            auto base = chainbell::default_base(dw, pair);
            auto x0 = chainbell::pair_observable(0, opts.chain_n, dw, pair, base);
            auto ctx_x0 = MeasurementContext::single({dw, dw}, x0, {0}, Party::A);
            DeviationTracker t;
            for (const auto& lab : support_of(model, dbl)) {
                auto rw = model.row(ctx_wd, lab);
                auto rx = model.row(ctx_x0, lab);
                for (Index w = 0; w < dw; ++w) {
                    double xv = w == pair.first ? 1.0 : w == pair.second ? -1.0 : base[w];
                    auto k = x0.eigen_index(xv);
                    if (!k) throw Error(ErrorKind::InvalidArgument, "pair observable lost an eigenvalue");
                    t.observe(std::abs(rw[w] - rx[*k]), lab, "", "(" + std::to_string(w + 1) + ")");
                }
            }
            run.add("q1 relabel (" + std::to_string(pair.first) + "," + std::to_string(pair.second) + ")",
                    Certificate::make("relabel", t.worst(), tol, t.witness("W and X_0 tables disagree")));
        }
        DeviationTracker t;
        const double target = 1.0 / static_cast<double>(wsupport.size());
        for (const auto& lab : support_of(model, dbl)) {
            auto rw = model.row(ctx_wd, lab);
            const double allowed = 2.0 * residual[lab];
            for (Index w = 0; w < dw; ++w) {
                bool in = std::binary_search(wsupport.begin(), wsupport.end(), w);
                double dev = in ? std::abs(rw[w] - target) - allowed : rw[w];
                t.observe(std::max(0.0, dev), lab, "", "(" + std::to_string(w + 1) + ")");
            }
        }
        run.add("q1 value", Certificate::make("q^2 per lambda", t.worst(), tol,
                                              t.witness("P(xi|lambda) differs from q^2 beyond the chain residual")));
    }

    // (q2) entangle with a copy on H_A (x) H'_A
    State phi_ba;
    {
        std::vector<State> e;
        std::vector<double> cq;
        for (Index w : wsupport) {
            e.push_back(State::basis({L, m}, w));
            cq.push_back(q);
        }
        auto ctx_small = MeasurementContext::single({L, m}, wobs, {0, 1}, Party::B);
        run.add("q2", hvmodel::check_se(model, ctx_small, e, cq, e, tol));
        phi_ba = hvmodel::schmidt_sum(e, cq, e).reshaped({L, m, L, m});
    }

    // (q3) add the catalyst, then reorder to the canonical factors
    {
        State kappa = embezzle::catalyst(n);
        auto ctx_ba = MeasurementContext::single({L, m, L, m}, wobs, {0, 1}, Party::B);
        run.add("q3", hvmodel::check_pe(model, phi_ba, kappa, ctx_ba, tol));
        State prod = phi_ba.tensor(kappa);
        auto perm = qcore::Unitary::factor_permutation(prod.dims(), {4, 5, 2, 3, 0, 1});
        run.add("q3 reorder", hvmodel::check_ui(model, prod, perm, w_b, tol));
        double eps = qcore::overlap_epsilon(perm.apply(prod), ks.target);
        run.add("q3 target", Certificate::make("state identity", eps, 1e-12));
    }

    // (q4) continuity against (key4), (q5) Lemma 1 with U_A^-1 on party A
    run.add("q4", hvmodel::check_cp(model, ks.target, ks.k4, w_b, opts.k_cp, tol));
    run.add("q5", hvmodel::compare_on_supports("Lemma1:Y under U_A^-1", model, ks.k3, w_b, ks.k4, w_b, tol));

    // (c1) psi -> psi_AB -> psi''' on the canonical factors
    {
        run.add("c1 SE", hvmodel::check_se(model, ctx_zdiag, basis_l, eb.c, basis_l, tol));
        State rest = embezzle::catalyst(n).tensor(State::basis({m, m}, 0));
        auto ctx_ab = MeasurementContext::single({L, L}, zdiag, {0}, Party::A);
        run.add("c1 PE", hvmodel::check_pe(model, ks.psi_ab, rest, ctx_ab, tol));
        State prod = ks.psi_ab.tensor(rest);
        auto perm = qcore::Unitary::factor_permutation(prod.dims(), {2, 3, 0, 4, 1, 5});
        run.add("c1 reorder", hvmodel::check_ui(model, prod, perm, e_a, tol));
        double eps = qcore::overlap_epsilon(perm.apply(prod), ks.k1);
        run.add("c1 key1", Certificate::make("state identity", eps, 1e-12));
    }

    // (c2) Lemma 1 with U_B on party B
    run.add("c2", hvmodel::compare_on_supports("Lemma1:X under U_B", model, ks.k1, e_a, ks.k3, e_a, tol));

    // (c4) cross amplitudes of key3 vanish
    {
        double worst = 0.0;
        for (const auto& x : ks.k3.entries()) {
            auto dg = qcore::unravel(x.index, d6);
            if (dg[kA] != dg[kB]) worst = std::max(worst, std::norm(x.amp));
        }
        auto born = qcore::born_distribution(ks.k3, joint);
        double cross = 0.0;
        for (std::size_t f = 0; f < born.size(); ++f) {
            auto idx = joint.unflatten(f);
            if (idx[1] / m != idx[0]) cross += born[f];
        }
        run.add("c4", Certificate::make("cross terms", std::max(worst, cross), 0.0));
    }

    // (c5) CQ on the joint context, hence zero cross probabilities per lambda
    const auto lambdas3 = support_of(model, ks.k3);
    run.add("c5", hvmodel::check_cq(model, ks.k3, joint, tol));
    {
        DeviationTracker t;
        for (const auto& lab : lambdas3) {
            auto r = model.row(joint, lab);
            for (std::size_t f = 0; f < r.size(); ++f) {
                auto idx = joint.unflatten(f);
                if (idx[1] / m != idx[0]) t.observe(r[f], lab, "", hvmodel::format_outcome(joint.outcome_values(f)));
            }
        }
        run.add("c5 cross", Certificate::make("cross per lambda", t.worst(), tol,
                                              t.witness("cross outcome has positive probability")));
    }

    // (c6), (c7)
    run.add("c6/c7", hvmodel::check_pi(model, joint, tol));

    // (c8)
    {
        DeviationTracker t;
        for (const auto& lab : lambdas3) {
            auto re = model.row(e_a, lab);
            auto rw = model.row(w_b, lab);
            for (std::size_t i = 0; i < l; ++i) {
                double s = 0.0;
                for (Index j = 0; j < m; ++j) s += rw[xi_index(i, j, m)];
                t.observe(std::abs(re[i] - s), lab, "", "(" + std::to_string(i) + ")");
            }
        }
        run.add("c8", Certificate::make("sum over j", t.worst(), (2.0 + static_cast<double>(dw)) * tol,
                                        t.witness("P(e_i) differs from the sum of P(xi^{ij})")));
    }

    // final comparison
    TheoremCertificate tc;
    tc.eigenvalues = eb.values;
    tc.epsilon = opts.epsilon;
    tc.chain_n = opts.chain_n;
    tc.embezzle_exp = n_exp;
    tc.embezzle_n = n;
    tc.m = m;
    tc.m_list = ks.m_list;
    tc.key4_overlap = ks.key4_overlap;
    tc.capped = capped;
    const double approx_bound = 3.0 * opts.epsilon / static_cast<double>(l);
    tc.bound = opts.k_total * std::sqrt(opts.epsilon) + approx_bound + tol;

    std::vector<double> approx_sq(l, 0.0);
    double approx_dev = 0.0;
    for (std::size_t t = 0; t < support.size(); ++t) {
        approx_sq[support[t]] = approx.c_prime[t] * approx.c_prime[t];
        approx_dev = std::max(approx_dev, std::abs(approx_sq[support[t]] - eb.born[support[t]]));
    }
    run.add("approx", Certificate::make("|c'^2 - c^2|", approx_dev, approx_bound));

    DeviationTracker dev_born, dev_approx;
    auto mu = model.measure_of(psi);
    for (const auto& [lab, w] : mu.weights()) {
        LambdaRow row;
        row.label = lab;
        row.weight = w;
        row.probability = model.row(ctx_z, lab);
        row.born = eb.born;
        row.approx = approx_sq;
        for (std::size_t i = 0; i < l; ++i) {
            double d = std::abs(row.probability[i] - row.born[i]);
            row.deviation = std::max(row.deviation, d);
            dev_born.observe(d, lab, "", hvmodel::format_outcome({eb.values[i]}));
            dev_approx.observe(std::abs(row.probability[i] - approx_sq[i]), lab, "",
                               hvmodel::format_outcome({eb.values[i]}));
        }
        tc.max_deviation = std::max(tc.max_deviation, row.deviation);
        tc.per_lambda.push_back(std::move(row));
    }
    auto links = run.take();
    links.push_back(Certificate::make("final vs (c')^2", dev_approx.worst(), opts.k_total * std::sqrt(opts.epsilon) + tol,
                                      dev_approx.witness("P(Z=z_i|lambda) far from (c'_i)^2")));
    links.push_back(Certificate::make("final vs |c|^2", dev_born.worst(), tc.bound,
                                      dev_born.witness("P(Z=z_i|lambda) far from |c_i|^2")));
    tc.certificate = Certificate::all_of("step3", std::move(links));
    tc.passed = tc.certificate.passed;
    return tc;
}

TheoremCertificate degenerate_reduce(const HiddenVariableModel& model, const State& psi_in, const Observable& z,
                                     const TheoremOptions& opts) {
    const State psi = psi_in.flattened();
    if (z.dim() != psi.dimension()) throw Error(ErrorKind::DimensionMismatch, "Z and psi dimensions differ");
    if (z.outcome_count() == z.dim()) return step3_certificate(model, psi, z, opts);

    std::vector<std::size_t> labels;
    Eigen::MatrixXcd v = z.eigenvectors(&labels);
    const auto l = v.cols();
    Eigen::VectorXd r(l);
    for (Eigen::Index i = 0; i < l; ++i) r(i) = static_cast<double>(i);
    Observable zr(v * r.cast<Complex>().asDiagonal() * v.adjoint());
    TheoremCertificate refined = step3_certificate(model, psi, zr, opts);

    const auto ctx_z = MeasurementContext::whole(z);
    const std::size_t k_count = z.outcome_count();
    std::vector<std::size_t> mult(k_count, 0);
    for (auto k : labels) ++mult[k];
    std::size_t max_mult = *std::max_element(mult.begin(), mult.end());

    TheoremCertificate tc = refined;
    tc.degenerate = true;
    tc.eigenvalues = z.eigenvalues();
    tc.per_lambda.clear();
    tc.max_deviation = 0.0;
    tc.bound = static_cast<double>(max_mult) * refined.bound;
    DeviationTracker recomb, dev;
    for (const auto& rr : refined.per_lambda) {
        LambdaRow row;
        row.label = rr.label;
        row.weight = rr.weight;
        row.probability = model.row(ctx_z, rr.label);
        row.born.assign(k_count, 0.0);
        row.approx.assign(k_count, 0.0);
        std::vector<double> summed(k_count, 0.0);
        for (Eigen::Index i = 0; i < l; ++i) {
            summed[labels[i]] += rr.probability[i];
            row.born[labels[i]] += rr.born[i];
            row.approx[labels[i]] += rr.approx[i];
        }
        for (std::size_t k = 0; k < k_count; ++k) {
            const auto out = hvmodel::format_outcome({tc.eigenvalues[k]});
            recomb.observe(std::abs(row.probability[k] - summed[k]), rr.label, "", out);
            double d = std::abs(row.probability[k] - row.born[k]);
            row.deviation = std::max(row.deviation, d);
            dev.observe(d - static_cast<double>(mult[k]) * refined.bound, rr.label, "", out);
        }
        tc.max_deviation = std::max(tc.max_deviation, row.deviation);
        tc.per_lambda.push_back(std::move(row));
    }
    auto recomb_cert = Certificate::make("recombination", recomb.worst(), opts.tol,
                                         recomb.witness("P(Z=z|lambda) differs from the summed refined rows"));
    auto final_cert = Certificate::make("final vs |c|^2 (eigenspaces)", std::max(0.0, dev.worst()), 0.0,
                                        dev.witness("eigenspace probability beyond its bound"));
    tc.certificate = Certificate::all_of("degenerate", {refined.certificate, recomb_cert, final_cert});
    tc.passed = tc.certificate.passed;
    return tc;
}

TheoremCertificate theorem_verify(const HiddenVariableModel& model, const State& psi, const Observable& z,
                                  const TheoremOptions& opts) {
    auto step1 = chainbell::step1_certificate(model, opts.chain_n, opts.tol);
    if (!step1.passed()) throw AxiomViolation("step1", step1.certificate);
    TheoremCertificate tc = degenerate_reduce(model, psi, z, opts);
    tc.certificate = Certificate::all_of("theorem", {step1.certificate, tc.certificate});
    tc.passed = tc.certificate.passed;
    return tc;
}

nlohmann::ordered_json to_json(const TheoremCertificate& t) {
    nlohmann::ordered_json j;
    j["check_name"] = t.certificate.check_name;
    j["passed"] = t.passed;
    j["worst_deviation"] = t.max_deviation;
    j["bound"] = t.bound;
    j["epsilon"] = t.epsilon;
    j["N"] = t.chain_n;
    j["embezzle_exponent"] = t.embezzle_exp;
    j["embezzle_n"] = t.embezzle_n;
    j["m"] = t.m;
    j["m_list"] = t.m_list;
    j["key4_overlap"] = t.key4_overlap;
    j["embezzle_capped"] = t.capped;
    j["degenerate"] = t.degenerate;
    j["eigenvalues"] = t.eigenvalues;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : t.per_lambda) {
        nlohmann::ordered_json o;
        o["lambda"] = r.label;
        o["weight"] = r.weight;
        o["probability"] = r.probability;
        o["born"] = r.born;
        o["approx"] = r.approx;
        o["deviation"] = r.deviation;
        rows.push_back(o);
    }
    j["per_lambda"] = rows;
    j["certificate"] = hvmodel::to_json(t.certificate);
    return j;
}

}  // namespace crq::pipeline
