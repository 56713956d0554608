#include "crq/pipeline/key_states.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace crq::pipeline {

using qcore::Entry;

std::uint64_t default_max_nonzeros() {
    if (const char* v = std::getenv("CRQ_MAX_NONZEROS")) {
        char* end = nullptr;
        unsigned long long x = std::strtoull(v, &end, 10);
        if (end != v && *end == '\0' && x > 0) return x;
    }
    return 10'000'000;
}

std::uint64_t key_state_size(Index m, int n_exp, std::uint64_t sum_m, std::size_t l) {
    long double n = std::pow(static_cast<long double>(m), 2.0L * n_exp);
    long double s = n * static_cast<long double>(std::max<std::uint64_t>(sum_m, l));
    if (s > 1e18L) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(s);
}

KeyStates build_key_states(const std::vector<double>& c, const RationalApprox& approx, int n_exp, Index m_ambient,
                           std::uint64_t max_nonzeros) {
    KeyStates ks;
    const std::size_t l = c.size();
    if (l == 0) throw Error(ErrorKind::InvalidArgument, "no coefficients");
    double s = 0.0;
    for (std::size_t i = 0; i < l; ++i) {
        if (c[i] < 0.0 || !std::isfinite(c[i])) throw Error(ErrorKind::InvalidArgument, "coefficients must be >= 0");
        if (c[i] > 0.0) ks.support.push_back(i);
        s += c[i] * c[i];
    }
    if (std::fabs(s - 1.0) > 1e-12) throw Error(ErrorKind::NotNormalized, "sum of squared coefficients is not 1");
    if (approx.c.size() != ks.support.size())
        throw Error(ErrorKind::InvalidArgument, "approximation does not match the support of c");
    ks.c = c;

    auto reduced = approx.reduced_m();
    ks.m_list.assign(l, 1);
    std::uint64_t sum_m = 0;
    for (std::size_t t = 0; t < ks.support.size(); ++t) {
        ks.m_list[ks.support[t]] = reduced[t];
        sum_m += reduced[t];
    }
    const Index mmax = *std::max_element(ks.m_list.begin(), ks.m_list.end());
    ks.m = m_ambient == 0 ? mmax : m_ambient;
    if (ks.m < mmax) throw Error(ErrorKind::InvalidArgument, "ambient m is smaller than max m_i");
    ks.q = 1.0 / std::sqrt(static_cast<double>(sum_m));
    ks.n_exp = n_exp;

    if (key_state_size(ks.m, n_exp, sum_m, l) > max_nonzeros)
        throw Error(ErrorKind::DimensionBudgetExceeded,
                    "key states would exceed " + std::to_string(max_nonzeros) + " nonzeros");
    for (std::size_t i = 0; i < l; ++i) ks.cfgs.push_back(embezzle::EmbezzleConfig::make(ks.m, n_exp, ks.m_list[i]));
    ks.n = ks.cfgs.front().n;
    const Index n = ks.n, m = ks.m;
    ks.dims = {n, n, static_cast<Index>(l), m, static_cast<Index>(l), m};

    {
        std::vector<Entry> e;
        for (std::size_t i : ks.support) e.push_back({static_cast<Index>(i) * l + i, Complex{c[i], 0.0}});
        ks.psi_ab = State({static_cast<Index>(l), static_cast<Index>(l)}, std::move(e));
    }

    const double cn = embezzle::harmonic(n);
    std::vector<Entry> e1, et;
    e1.reserve(n * ks.support.size());
    et.reserve(n * sum_m);
    for (Index k = 0; k < n; ++k) {
        const double w = 1.0 / std::sqrt(static_cast<double>(k + 1) * cn);
        for (std::size_t i : ks.support) {
            e1.push_back({qcore::ravel({k, k, i, 0, i, 0}, ks.dims), Complex{c[i] * w, 0.0}});
            for (Index j = 0; j < ks.m_list[i]; ++j)
                et.push_back({qcore::ravel({k, k, i, j, i, j}, ks.dims), Complex{ks.q * w, 0.0}});
        }
    }
    ks.k1 = State(ks.dims, std::move(e1));
    ks.target = State::normalized(ks.dims, std::move(et));

    ks.u_a = embezzle::block_unitary(ks.dims, kAfar, kA, kAprime, ks.cfgs);
    ks.u_b = embezzle::block_unitary(ks.dims, kBfar, kB, kBprime, ks.cfgs);
    ks.k2 = ks.u_a.apply(ks.k1);
    ks.k3 = ks.u_b.apply(ks.k1);
    ks.k4 = ks.u_b.apply(ks.k2);
    ks.key4_overlap = std::abs(qcore::inner(ks.target, ks.k4));
    return ks;
}

}  // namespace crq::pipeline
