#include "crq/cli/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "crq/chainbell/chainbell.hpp"
#include "crq/embezzle/embezzle.hpp"
#include "crq/hvmodel/born_model.hpp"
#include "crq/hvmodel/checks.hpp"
#include "crq/hvmodel/tabular_model.hpp"
#include "crq/pipeline/rational.hpp"
#include "crq/pipeline/theorem.hpp"
#include "crq/qcore/json_io.hpp"

namespace crq::cli {

using nlohmann::ordered_json;

namespace {

struct RunConfig {
    std::string output;
    std::string format;  // empty: csv for bell-scan, json elsewhere
    double tol = 1e-9;

    int n_max = 16;

    Index m = 2;
    int n_exp = 1;
    Index mi = 2;
    std::string order = "lex";

    std::vector<double> coeffs;
    double epsilon = 0.1;
    std::string policy;

    std::string model_path;
    std::string check = "all";

    std::string state_path;
    std::string observable_path;
    std::string model = "born";
    int chain_n = 4;
    std::size_t random_dim = 0;
    std::uint64_t seed = 20240607;
    std::uint64_t max_nonzeros = 0;
};

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Parse, "cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, path + ": " + e.what());
    }
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

int bell_scan(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.n_max < 1) throw Error(ErrorKind::InvalidArgument, "--n-max must be >= 1");
    bool ok = true;
    ordered_json rows = ordered_json::array();
    std::ostringstream csv;
    csv << "N,brute_force,closed_form,abs_diff\n";
    for (int n = 1; n <= cfg.n_max; ++n) {
        double b = chainbell::chained_bell_quantum(n);
        double c = chainbell::chained_bell_closed_form(n);
        double d = std::abs(b - c);
        ok = ok && d <= 1e-10;
        csv << n << ',' << fmt(b) << ',' << fmt(c) << ',' << fmt(d) << '\n';
        rows.push_back({{"N", n}, {"brute_force", b}, {"closed_form", c}, {"abs_diff", d}});
    }
    if (cfg.format == "json" || cfg.format == "text") {
        ordered_json j{{"check_name", "chained-bell closed form"}, {"passed", ok}};
        double worst = 0.0;
        for (const auto& r : rows) worst = std::max(worst, r["abs_diff"].get<double>());
        j["worst_deviation"] = worst;
        j["bound"] = 1e-10;
        j["rows"] = rows;
        out << j.dump(2) << '\n';
    } else {
        out << csv.str();
    }
    err << "bell-scan: N = 1.." << cfg.n_max << (ok ? " match" : " MISMATCH") << '\n';
    return ok ? kOk : kCertificateFailed;
}

int embezzle_cmd(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    auto ec = embezzle::EmbezzleConfig::make(cfg.m, cfg.n_exp, cfg.mi);
    auto order = cfg.order == "rev" ? embezzle::CompletionOrder::ReverseLexicographic
                                    : embezzle::CompletionOrder::Lexicographic;
    double f = embezzle::embezzlement_fidelity(ec, order);
    const double bound = 1.0 / (2.0 * cfg.n_exp);
    bool ok = 1.0 - f <= bound;
    ordered_json j{{"check_name", "embezzlement fidelity"},
                   {"passed", ok},
                   {"worst_deviation", 1.0 - f},
                   {"bound", bound},
                   {"m", ec.m},
                   {"N", ec.n_exp},
                   {"n", ec.n},
                   {"mi", ec.mi},
                   {"order", cfg.order},
                   {"fidelity", f}};
    if (cfg.format == "csv")
        out << "m,N,n,mi,fidelity,bound\n"
            << ec.m << ',' << ec.n_exp << ',' << ec.n << ',' << ec.mi << ',' << fmt(f) << ',' << fmt(bound) << '\n';
    else
        out << j.dump(2) << '\n';
    err << "embezzle: fidelity " << f << (ok ? " >= " : " < ") << 1.0 - bound << '\n';
    return ok ? kOk : kCertificateFailed;
}

int approx_cmd(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    auto policy = cfg.policy.empty() ? pipeline::ApproxPolicy::PreferExact : pipeline::policy_from_name(cfg.policy);
    auto a = pipeline::rational_approx(cfg.coeffs, cfg.epsilon, policy);
    auto j = pipeline::to_json(a);
    bool ok = a.exact_sum_is_one() && a.quotient_is_constant() && a.within_bound();
    out << j.dump(2) << '\n';
    err << "approx-coeffs: q = " << j["q"].get<std::string>() << (ok ? "" : " (invariant violated)") << '\n';
    return ok ? kOk : kCertificateFailed;
}

int verify_model_cmd(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    auto model = hvmodel::TabularModel::from_file(cfg.model_path);
    const bool want_cq = cfg.check == "all" || cfg.check == "cq";
    const bool want_pi = cfg.check == "all" || cfg.check == "pi";
    if (!want_cq && !want_pi) throw Error(ErrorKind::InvalidArgument, "--check must be cq, pi or all");
    std::vector<hvmodel::Certificate> certs;
    if (want_cq)
        for (const auto& me : model.measures())
            for (const auto& te : model.tables())
                if (te.context.total_dimension() == me.state.dimension()) {
                    auto c = hvmodel::check_cq(model, me.state, te.context, cfg.tol);
                    certs.push_back(c);
                }
    if (want_pi)
        for (const auto& te : model.tables())
            if (te.context.size() == 2 && te.context.entry_for_party(qcore::Party::A) &&
                te.context.entry_for_party(qcore::Party::B))
                certs.push_back(hvmodel::check_pi(model, te.context, cfg.tol));
    auto all = hvmodel::Certificate::all_of("verify-model", certs);
    ordered_json j = hvmodel::to_json(all);
    j["model"] = model.name();
    out << j.dump(2) << '\n';
    err << "verify-model " << model.name() << ": " << (all.passed ? "all checks pass" : "FAILED");
    if (auto* f = all.first_failure(); f && f->witness) err << " (" << f->check_name << ", witness " << f->witness->label << ")";
    err << '\n';
    return all.passed ? kOk : kCertificateFailed;
}

int theorem_cmd(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::optional<qcore::State> psi;
    std::optional<qcore::Observable> z;
    if (cfg.random_dim > 0) {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> u(0.25, 1.0);
        std::vector<Complex> amps;
        std::vector<double> zv;
        for (std::size_t i = 0; i < cfg.random_dim; ++i) {
            amps.emplace_back(u(rng), 0.0);
            zv.push_back(static_cast<double>(i + 1));
        }
        double s = 0.0;
        for (auto& a : amps) s += std::norm(a);
        for (auto& a : amps) a /= std::sqrt(s);
        psi = qcore::State::from_dense({cfg.random_dim}, amps);
        z = qcore::Observable::diagonal(zv);
    }
    if (!cfg.state_path.empty()) psi = qcore::state_from_json(read_json(cfg.state_path));
    if (!cfg.observable_path.empty()) z = qcore::observable_from_json(read_json(cfg.observable_path));
    if (!psi || !z) throw Error(ErrorKind::InvalidArgument, "theorem needs --state and --observable (or --random)");

    std::unique_ptr<hvmodel::HiddenVariableModel> model;
    if (cfg.model == "born")
        model = std::make_unique<hvmodel::BornModel>();
    else
        model = std::make_unique<hvmodel::TabularModel>(hvmodel::TabularModel::from_file(cfg.model));

    pipeline::TheoremOptions opts;
    opts.epsilon = cfg.epsilon;
    opts.chain_n = cfg.chain_n;
    opts.tol = cfg.tol;
    if (cfg.max_nonzeros > 0) opts.max_nonzeros = cfg.max_nonzeros;
    if (!cfg.policy.empty()) opts.policy = pipeline::policy_from_name(cfg.policy);
    try {
        auto tc = pipeline::theorem_verify(*model, *psi, *z, opts);
        out << pipeline::to_json(tc).dump(2) << '\n';
        err << "theorem: " << (tc.passed ? "passed" : "FAILED") << ", max deviation " << tc.max_deviation
            << " <= bound " << tc.bound << " (eps " << tc.epsilon << ", N " << tc.chain_n << ", embezzler n "
            << tc.embezzle_n << (tc.capped ? ", capped" : "") << ")\n";
        return tc.passed ? kOk : kCertificateFailed;
    } catch (const hvmodel::AxiomViolation& v) {
        ordered_json j{{"check_name", "theorem"},
                       {"passed", false},
                       {"worst_deviation", v.certificate().worst_deviation},
                       {"bound", v.certificate().bound},
                       {"failed_link", v.link()},
                       {"certificate", hvmodel::to_json(v.certificate())}};
        out << j.dump(2) << '\n';
        err << "theorem: " << v.what() << '\n';
        return kCertificateFailed;
    }
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidArgument, "bad number '" + tok + "' in --coeffs");
        }
    }
    return v;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    std::string coeffs;
    CLI::App app{"crq: hidden-variable audits, chained Bell values and embezzlement certificates", "crq"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    auto common = [&](CLI::App* s) {
        s->add_option("-o,--output", cfg.output, "write the report to a file");
        s->add_option("--format", cfg.format, "json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
        s->add_option("--tol", cfg.tol, "tolerance")->check(CLI::PositiveNumber);
    };

    auto* bell = app.add_subcommand("bell-scan", "chained Bell values for N = 1..n-max");
    bell->add_option("--n-max", cfg.n_max, "largest N")->check(CLI::Range(1, 4096));
    common(bell);

    auto* emb = app.add_subcommand("embezzle", "embezzlement fidelity");
    emb->add_option("--m", cfg.m, "dimension of H'")->required()->check(CLI::Range(1, 1 << 20));
    emb->add_option("--N", cfg.n_exp, "n = m^(2N)")->required()->check(CLI::Range(1, 64));
    emb->add_option("--mi", cfg.mi, "target rank m_i")->required()->check(CLI::Range(1, 1 << 20));
    emb->add_option("--order", cfg.order, "completion order: lex or rev")->check(CLI::IsMember({"lex", "rev"}));
    common(emb);

    auto* apx = app.add_subcommand("approx-coeffs", "exact rational approximation of coefficients");
    apx->add_option("--coeffs", coeffs, "comma-separated positive coefficients")->required();
    apx->add_option("--epsilon", cfg.epsilon, "approximation parameter")->required()->check(CLI::Range(0.0, 1.0));
    apx->add_option("--policy", cfg.policy, "prefer-exact, common-denominator or smallest-denominator");
    common(apx);

    auto* vm = app.add_subcommand("verify-model", "audit a tabulated hidden-variable model");
    vm->add_option("model", cfg.model_path, "model JSON file")->required()->check(CLI::ExistingFile);
    vm->add_option("--check", cfg.check, "cq, pi or all")->check(CLI::IsMember({"cq", "pi", "all"}));
    common(vm);

    auto* th = app.add_subcommand("theorem", "full theorem certificate");
    th->add_option("--state", cfg.state_path, "state JSON file");
    th->add_option("--observable", cfg.observable_path, "observable JSON file");
    th->add_option("--model", cfg.model, "born or a model JSON file");
    th->add_option("--epsilon", cfg.epsilon, "epsilon")->check(CLI::Range(0.0, 1.0));
    th->add_option("--N", cfg.chain_n, "chained Bell length")->check(CLI::Range(1, 4096));
    th->add_option("--random", cfg.random_dim, "random state on C^l with Z = diag(1..l)")->check(CLI::Range(1, 16));
    th->add_option("--seed", cfg.seed, "seed for --random");
    th->add_option("--policy", cfg.policy, "coefficient approximation policy");
    th->add_option("--max-nonzeros", cfg.max_nonzeros, "sparse-state budget (default CRQ_MAX_NONZEROS or 1e7)");
    common(th);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        err << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        err << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help("", CLI::AppFormatMode::All);
        return kUsage;
    }

    std::ostringstream buf;
    int code = kUsage;
    try {
        if (bell->parsed()) {
            code = bell_scan(cfg, buf, err);
        } else if (emb->parsed()) {
            code = embezzle_cmd(cfg, buf, err);
        } else if (apx->parsed()) {
            cfg.coeffs = parse_list(coeffs);
            code = approx_cmd(cfg, buf, err);
        } else if (vm->parsed()) {
            code = verify_model_cmd(cfg, buf, err);
        } else if (th->parsed()) {
            code = theorem_cmd(cfg, buf, err);
        }
    } catch (const hvmodel::AxiomViolation& v) {
        ordered_json j = hvmodel::to_json(v.certificate());
        j["failed_link"] = v.link();
        buf << j.dump(2) << '\n';
        err << v.what() << '\n';
        code = kCertificateFailed;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    if (cfg.output.empty()) {
        out << buf.str();
    } else {
        std::ofstream f(cfg.output);
        if (!f) {
            err << "error: cannot write '" << cfg.output << "'\n";
            return kUsage;
        }
        f << buf.str();
    }
    return code;
}

}  // namespace crq::cli
