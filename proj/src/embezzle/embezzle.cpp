#include "crq/embezzle/embezzle.hpp"

#include <cmath>
#include <limits>

namespace crq::embezzle {

using qcore::Entry;

namespace {

void check_pair(const EmbezzleConfig& cfg, Index k, Index j) {
    if (k < 1 || k > cfg.n || j < 1 || j > cfg.m) throw Error(ErrorKind::IndexOutOfRange, "embezzler index pair");
}

// Position (0-based) of a tail pair (j > m_i) within the tail.
Index tail_rank(const EmbezzleConfig& c, Index s, Index j, CompletionOrder order) {
    const Index w = c.m - c.mi;
    if (order == CompletionOrder::Lexicographic) return (s - 1) * w + (j - c.mi - 1);
    return (j - c.mi - 1) * c.n + (s - 1);
}

IndexPair tail_unrank(const EmbezzleConfig& c, Index r, CompletionOrder order) {
    const Index w = c.m - c.mi;
    if (order == CompletionOrder::Lexicographic) return {r / w + 1, c.mi + 1 + r % w};
    return {r % c.n + 1, c.mi + 1 + r / c.n};
}

}  // namespace

EmbezzleConfig EmbezzleConfig::make(Index m, int n_exp, Index mi) {
    if (m < 1 || n_exp < 1) throw Error(ErrorKind::InvalidArgument, "embezzler needs m >= 1 and N >= 1");
    if (mi < 1 || mi > m) throw Error(ErrorKind::InvalidArgument, "need 1 <= m_i <= m");
    EmbezzleConfig c;
    c.m = m;
    c.n_exp = n_exp;
    c.mi = mi;
    Index n = 1;
    for (int e = 0; e < 2 * n_exp; ++e) {
        if (n > std::numeric_limits<Index>::max() / 4 / m)
            throw Error(ErrorKind::InvalidArgument, "n = m^(2N) overflows");
        n *= m;
    }
    c.n = n;
    // n * m must also fit for the joint index
    if (n > std::numeric_limits<Index>::max() / 4 / m) throw Error(ErrorKind::InvalidArgument, "n * m overflows");
    return c;
}

double harmonic(Index n) {
    double s = 0.0;
    for (Index k = n; k >= 1; --k) s += 1.0 / static_cast<double>(k);
    return s;
}

State catalyst(Index n) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "catalyst needs n >= 1");
    const double c = harmonic(n);
    std::vector<Entry> e;
    e.reserve(n);
    for (Index k = 1; k <= n; ++k)
        e.push_back({(k - 1) * n + (k - 1), Complex{1.0 / std::sqrt(static_cast<double>(k) * c), 0.0}});
    return State({n, n}, std::move(e));
}

IndexPair embezzle_perm(const EmbezzleConfig& cfg, Index k, Index j, CompletionOrder order) {
    check_pair(cfg, k, j);
    const Index p = (j - 1) * cfg.n + k;  // 1-based position in the first list
    const Index head = cfg.n * cfg.mi;
    if (p <= head) return {(p - 1) / cfg.mi + 1, (p - 1) % cfg.mi + 1};
    return tail_unrank(cfg, p - head - 1, order);
}

IndexPair embezzle_perm_inverse(const EmbezzleConfig& cfg, Index k, Index j, CompletionOrder order) {
    check_pair(cfg, k, j);
    Index p = j <= cfg.mi ? (k - 1) * cfg.mi + j : cfg.n * cfg.mi + tail_rank(cfg, k, j, order) + 1;
    return {(p - 1) % cfg.n + 1, (p - 1) / cfg.n + 1};
}

Unitary embezzler(const Dims& dims, std::size_t f_hpp, std::size_t f_hp, const EmbezzleConfig& cfg,
                  CompletionOrder order) {
    if (f_hpp >= dims.size() || f_hp >= dims.size() || f_hpp == f_hp)
        throw Error(ErrorKind::FactorMismatch, "embezzler factors");
    if (dims[f_hpp] != cfg.n || dims[f_hp] != cfg.m)
        throw Error(ErrorKind::FactorMismatch, "embezzler factors must have dims (n, m)");
    const Index m = cfg.m;
    auto fwd = [cfg, order, m](Index x) {
        auto r = embezzle_perm(cfg, x / m + 1, x % m + 1, order);
        return (r.k - 1) * m + (r.j - 1);
    };
    auto inv = [cfg, order, m](Index x) {
        auto r = embezzle_perm_inverse(cfg, x / m + 1, x % m + 1, order);
        return (r.k - 1) * m + (r.j - 1);
    };
    return Unitary::index_map(dims, {f_hpp, f_hp}, fwd, inv, "U^(" + std::to_string(cfg.mi) + ")");
}

State apply_embezzler(const EmbezzleConfig& cfg, const State& psi, std::size_t f_hpp, std::size_t f_hp,
                      CompletionOrder order) {
    return embezzler(psi.dims(), f_hpp, f_hp, cfg, order).apply(psi);
}

Unitary block_unitary(const Dims& dims, std::size_t f_hpp, std::size_t f_h, std::size_t f_hp,
                      const std::vector<EmbezzleConfig>& cfgs, const std::vector<Eigen::MatrixXcd>& projectors,
                      CompletionOrder order) {
    if (cfgs.empty()) throw Error(ErrorKind::InvalidArgument, "no block configurations");
    if (f_hpp >= dims.size() || f_h >= dims.size() || f_hp >= dims.size() || f_hpp == f_h || f_h == f_hp ||
        f_hpp == f_hp)
        throw Error(ErrorKind::FactorMismatch, "block unitary factors");
    const Index n = cfgs.front().n, m = cfgs.front().m, l = dims[f_h];
    for (const auto& c : cfgs)
        if (c.n != n || c.m != m) throw Error(ErrorKind::InvalidArgument, "block configurations must share n and m");
    if (dims[f_hpp] != n || dims[f_hp] != m) throw Error(ErrorKind::FactorMismatch, "factors must have dims (n, m)");
    if (projectors.size() != l || cfgs.size() != l)
        throw Error(ErrorKind::BadProjectors, "need one projector and one configuration per basis vector of H");

    // block index i acts on the basis vector where P_i has its 1
    std::vector<std::size_t> cfg_of(l, l);
    for (std::size_t i = 0; i < l; ++i) {
        const auto& p = projectors[i];
        if (static_cast<Index>(p.rows()) != l || static_cast<Index>(p.cols()) != l)
            throw Error(ErrorKind::BadProjectors, "projector has the wrong size");
        std::size_t where = l;
        for (Eigen::Index r = 0; r < p.rows(); ++r)
            for (Eigen::Index c = 0; c < p.cols(); ++c) {
                const Complex v = p(r, c);
                if (r == c && std::abs(v - 1.0) < 1e-12) {
                    if (where != l) throw Error(ErrorKind::BadProjectors, "projector has rank above one");
                    where = static_cast<std::size_t>(r);
                } else if (std::abs(v) > 1e-12) {
                    throw Error(ErrorKind::BadProjectors, "projector is not a diagonal rank-one projector");
                }
            }
        if (where == l) throw Error(ErrorKind::BadProjectors, "projector is zero");
        if (cfg_of[where] != l) throw Error(ErrorKind::BadProjectors, "projectors are not pairwise orthogonal");
        cfg_of[where] = i;
    }
    std::vector<EmbezzleConfig> by_index(l);
    for (std::size_t e = 0; e < l; ++e) by_index[e] = cfgs[cfg_of[e]];

    // local index ((k-1) * l + e) * m + (j-1) over the factors (f_hpp, f_h, f_hp)
    auto fwd = [by_index, order, l, m](Index x) {
        const Index j = x % m, e = (x / m) % l, k = x / m / l;
        auto r = embezzle_perm(by_index[e], k + 1, j + 1, order);
        return ((r.k - 1) * l + e) * m + (r.j - 1);
    };
    auto inv = [by_index, order, l, m](Index x) {
        const Index j = x % m, e = (x / m) % l, k = x / m / l;
        auto r = embezzle_perm_inverse(by_index[e], k + 1, j + 1, order);
        return ((r.k - 1) * l + e) * m + (r.j - 1);
    };
    return Unitary::index_map(dims, {f_hpp, f_h, f_hp}, fwd, inv, "block U");
}

Unitary block_unitary(const Dims& dims, std::size_t f_hpp, std::size_t f_h, std::size_t f_hp,
                      const std::vector<EmbezzleConfig>& cfgs, CompletionOrder order) {
    if (f_h >= dims.size()) throw Error(ErrorKind::FactorMismatch, "block unitary factors");
    const auto l = static_cast<Eigen::Index>(dims[f_h]);
    std::vector<Eigen::MatrixXcd> proj;
    for (Eigen::Index i = 0; i < l; ++i) {
        Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(l, l);
        p(i, i) = 1.0;
        proj.push_back(p);
    }
    return block_unitary(dims, f_hpp, f_h, f_hp, cfgs, proj, order);
}

State max_entangled(Index m, Index mi) {
    if (mi < 1 || mi > m) throw Error(ErrorKind::InvalidArgument, "need 1 <= m_i <= m");
    std::vector<Entry> e;
    const double a = 1.0 / std::sqrt(static_cast<double>(mi));
    for (Index j = 0; j < mi; ++j) e.push_back({j * m + j, Complex{a, 0.0}});
    return State({m, m}, std::move(e));
}

double embezzlement_fidelity(const EmbezzleConfig& cfg, CompletionOrder order) {
    State kappa = catalyst(cfg.n);
    State start = kappa.tensor(State::basis({cfg.m, cfg.m}, 0));  // [A'', B'', A', B']
    const Dims& dims = start.dims();
    State out = embezzler(dims, 0, 2, cfg, order).apply(start);
    out = embezzler(dims, 1, 3, cfg, order).apply(out);
    State target = kappa.tensor(max_entangled(cfg.m, cfg.mi));
    return std::abs(qcore::inner(target, out));
}

}  // namespace crq::embezzle
