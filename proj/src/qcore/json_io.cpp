#include "crq/qcore/json_io.hpp"

namespace crq::qcore {

using nlohmann::json;

namespace {

template <typename T>
T get_or_throw(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::Parse, std::string("missing key '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("bad value for '") + key + "': " + e.what());
    }
}

}  // namespace

json state_to_json(const State& psi) {
    json j;
    j["dims"] = psi.dims();
    if (psi.dimension() <= (Index{1} << 16)) {
        auto v = psi.to_dense();
        std::vector<double> re, im;
        for (const auto& a : v) {
            re.push_back(a.real());
            im.push_back(a.imag());
        }
        j["re"] = re;
        j["im"] = im;
    } else {
        json e = json::array();
        for (const auto& x : psi.entries()) e.push_back({x.index, x.amp.real(), x.amp.imag()});
        j["entries"] = e;
    }
    return j;
}

State state_from_json(const json& j) {
    auto dims = get_or_throw<Dims>(j, "dims");
    if (j.contains("entries")) {
        std::vector<Entry> entries;
        for (const auto& e : j.at("entries")) {
            if (!e.is_array() || e.size() < 2) throw Error(ErrorKind::Parse, "sparse entry must be [index, re, im]");
            double im = e.size() > 2 ? e[2].get<double>() : 0.0;
            entries.push_back({e[0].get<Index>(), Complex{e[1].get<double>(), im}});
        }
        return State(std::move(dims), std::move(entries));
    }
    auto re = get_or_throw<std::vector<double>>(j, "re");
    std::vector<double> im(re.size(), 0.0);
    if (j.contains("im")) im = get_or_throw<std::vector<double>>(j, "im");
    if (im.size() != re.size()) throw Error(ErrorKind::Parse, "re and im lengths differ");
    std::vector<Complex> amps;
    for (std::size_t k = 0; k < re.size(); ++k) amps.emplace_back(re[k], im[k]);
    return State::from_dense(std::move(dims), amps);
}

json observable_to_json(const Observable& obs) {
    const auto& m = obs.matrix();
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<double> r, c;
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            r.push_back(m(i, k).real());
            c.push_back(m(i, k).imag());
        }
        re.push_back(r);
        im.push_back(c);
    }
    return {{"re", re}, {"im", im}};
}

Observable observable_from_json(const json& j) {
    auto re = get_or_throw<std::vector<std::vector<double>>>(j, "re");
    std::vector<std::vector<double>> im;
    if (j.contains("im")) im = get_or_throw<std::vector<std::vector<double>>>(j, "im");
    const auto d = static_cast<Eigen::Index>(re.size());
    if (d == 0) throw Error(ErrorKind::Parse, "empty observable");
    if (!im.empty() && static_cast<Eigen::Index>(im.size()) != d) throw Error(ErrorKind::Parse, "re and im shapes differ");
    Eigen::MatrixXcd m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (static_cast<Eigen::Index>(re[i].size()) != d) throw Error(ErrorKind::Parse, "observable must be square");
        if (!im.empty() && static_cast<Eigen::Index>(im[i].size()) != d) throw Error(ErrorKind::Parse, "re and im shapes differ");
        for (Eigen::Index k = 0; k < d; ++k) m(i, k) = Complex{re[i][k], im.empty() ? 0.0 : im[i][k]};
    }
    return Observable(m);
}

std::string party_name(Party p) {
    switch (p) {
        case Party::A: return "A";
        case Party::B: return "B";
        case Party::Single: return "single";
    }
    return "single";
}

Party party_from_name(const std::string& s) {
    if (s == "A" || s == "a") return Party::A;
    if (s == "B" || s == "b") return Party::B;
    if (s == "single" || s.empty()) return Party::Single;
    throw Error(ErrorKind::Parse, "unknown party '" + s + "'");
}

json context_to_json(const MeasurementContext& ctx) {
    json entries = json::array();
    for (const auto& e : ctx.entries()) {
        json o = observable_to_json(e.observable);
        o["factors"] = e.factors;
        o["party"] = party_name(e.party);
        entries.push_back(o);
    }
    return {{"dims", ctx.dims()}, {"entries", entries}};
}

MeasurementContext context_from_json(const json& j) {
    json list;
    std::optional<Dims> dims;
    if (j.is_object() && j.contains("entries")) {
        list = j.at("entries");
        if (j.contains("dims")) dims = get_or_throw<Dims>(j, "dims");
    } else if (j.is_array()) {
        list = j;
    } else {
        list = json::array({j});
    }
    std::vector<ContextEntry> entries;
    for (const auto& e : list) {
        ContextEntry c;
        c.observable = observable_from_json(e);
        if (e.contains("factors")) c.factors = get_or_throw<std::vector<std::size_t>>(e, "factors");
        if (e.contains("party")) c.party = party_from_name(get_or_throw<std::string>(e, "party"));
        entries.push_back(std::move(c));
    }
    if (entries.empty()) throw Error(ErrorKind::MalformedContext, "context has no observables");
    if (!dims) {
        if (entries.size() != 1) throw Error(ErrorKind::MalformedContext, "a joint context needs \"dims\"");
        dims = Dims{entries.front().observable.dim()};
    }
    for (auto& c : entries)
        if (c.factors.empty()) {
            for (std::size_t f = 0; f < dims->size(); ++f) c.factors.push_back(f);
        }
    return MeasurementContext(*dims, std::move(entries));
}

}  // namespace crq::qcore
