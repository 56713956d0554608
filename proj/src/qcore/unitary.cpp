#include "crq/qcore/unitary.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace crq::qcore {

namespace {

constexpr double kUnitaryTol = 1e-10;
constexpr double kPrune = 1e-15;
constexpr Index kExhaustiveCheck = Index{1} << 20;
constexpr Index kDenseIndexMap = 4096;

void check_factors(const Dims& dims, const std::vector<std::size_t>& factors) {
    if (factors.empty()) throw Error(ErrorKind::FactorMismatch, "unitary acts on no factor");
    std::set<std::size_t> seen;
    for (std::size_t f : factors) {
        if (f >= dims.size()) throw Error(ErrorKind::FactorMismatch, "factor index out of range");
        if (!seen.insert(f).second) throw Error(ErrorKind::FactorMismatch, "repeated factor");
    }
}

struct LocalSplit {
    std::vector<Index> strides;
    Dims local_dims;

    LocalSplit(const Dims& dims, const std::vector<std::size_t>& factors) {
        std::vector<Index> g(dims.size(), 1);
        for (std::size_t f = dims.size(); f-- > 1;) g[f - 1] = g[f] * dims[f];
        for (std::size_t f : factors) {
            strides.push_back(g[f]);
            local_dims.push_back(dims[f]);
        }
    }
    Index local_of(Index index) const {
        Index l = 0;
        for (std::size_t k = 0; k < strides.size(); ++k) l = l * local_dims[k] + (index / strides[k]) % local_dims[k];
        return l;
    }
    Index rest_of(Index index) const {
        for (std::size_t k = 0; k < strides.size(); ++k) index -= ((index / strides[k]) % local_dims[k]) * strides[k];
        return index;
    }
    Index compose(Index rest, Index local) const {
        for (std::size_t k = strides.size(); k-- > 0;) {
            rest += (local % local_dims[k]) * strides[k];
            local /= local_dims[k];
        }
        return rest;
    }
};

void sort_and_check(std::vector<Entry>& out) {
    std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.index < b.index; });
    for (std::size_t k = 1; k < out.size(); ++k)
        if (out[k].index == out[k - 1].index) throw Error(ErrorKind::NotUnitary, "index map is not injective");
}

}  // namespace

std::vector<Entry> apply_local(const std::vector<Entry>& entries, const Dims& dims,
                               const std::vector<std::size_t>& factors, const Eigen::MatrixXcd& u) {
    LocalSplit split(dims, factors);
    struct Keyed {
        Index rest;
        Index local;
        Complex amp;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(entries.size());
    for (const auto& e : entries) keyed.push_back({split.rest_of(e.index), split.local_of(e.index), e.amp});
    std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
        return a.rest != b.rest ? a.rest < b.rest : a.local < b.local;
    });
    const auto d = u.rows();
    std::vector<Entry> out;
    Eigen::VectorXcd v(d);
    std::size_t start = 0;
    while (start < keyed.size()) {
        std::size_t end = start;
        v.setZero();
        while (end < keyed.size() && keyed[end].rest == keyed[start].rest) {
            v(static_cast<Eigen::Index>(keyed[end].local)) = keyed[end].amp;
            ++end;
        }
        Eigen::VectorXcd w = u * v;
        for (Eigen::Index i = 0; i < d; ++i)
            if (std::abs(w(i)) >= kPrune) out.push_back({split.compose(keyed[start].rest, static_cast<Index>(i)), w(i)});
        start = end;
    }
    std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.index < b.index; });
    return out;
}

Unitary Unitary::identity(Dims dims) {
    Unitary u;
    u.kind_ = Kind::Identity;
    u.name_ = "identity";
    checked_product(dims);
    u.dims_ = std::move(dims);
    return u;
}

Unitary Unitary::dense(Dims dims, const Eigen::MatrixXcd& m, std::vector<std::size_t> factors) {
    check_factors(dims, factors);
    Index d = 1;
    for (std::size_t f : factors) d *= dims[f];
    if (m.rows() != m.cols() || static_cast<Index>(m.rows()) != d)
        throw Error(ErrorKind::DimensionMismatch, "unitary size does not match its factors");
    Eigen::MatrixXcd err = m.adjoint() * m - Eigen::MatrixXcd::Identity(m.rows(), m.cols());
    if (max_abs(err) > kUnitaryTol) throw Error(ErrorKind::NotUnitary, "U^dagger U differs from identity");
    Unitary u;
    u.kind_ = Kind::Dense;
    u.name_ = "dense";
    u.dims_ = std::move(dims);
    u.factors_ = std::move(factors);
    u.matrix_ = m;
    return u;
}

Unitary Unitary::whole(const Eigen::MatrixXcd& m) {
    return dense(Dims{static_cast<Index>(m.rows())}, m, {0});
}

Unitary Unitary::index_map(Dims dims, std::vector<std::size_t> factors, IndexFn forward, IndexFn inverse,
                           std::string name) {
    check_factors(dims, factors);
    Unitary u;
    u.kind_ = Kind::IndexMap;
    u.name_ = std::move(name);
    u.dims_ = std::move(dims);
    u.factors_ = std::move(factors);
    u.forward_ = std::move(forward);
    u.inverse_ = std::move(inverse);
    Index d = u.local_dim();
    if (d <= kExhaustiveCheck) {
        std::vector<bool> hit(d, false);
        for (Index x = 0; x < d; ++x) {
            Index y = u.forward_(x);
            if (y >= d || hit[y] || u.inverse_(y) != x) throw Error(ErrorKind::NotUnitary, "index map is not a bijection");
            hit[y] = true;
        }
    }
    return u;
}

Unitary Unitary::factor_permutation(Dims dims, std::vector<std::size_t> order) {
    if (order.size() != dims.size()) throw Error(ErrorKind::FactorMismatch, "permutation length");
    std::vector<bool> seen(dims.size(), false);
    for (std::size_t p : order) {
        if (p >= dims.size() || seen[p]) throw Error(ErrorKind::FactorMismatch, "not a permutation");
        seen[p] = true;
    }
    Unitary u;
    u.kind_ = Kind::FactorPermutation;
    u.name_ = "factor_permutation";
    u.dims_ = std::move(dims);
    u.factors_ = std::move(order);
    return u;
}

Dims Unitary::output_dims() const {
    if (kind_ != Kind::FactorPermutation) return dims_;
    Dims d;
    for (std::size_t p : factors_) d.push_back(dims_[p]);
    return d;
}

Index Unitary::local_dim() const {
    if (kind_ == Kind::Identity || kind_ == Kind::FactorPermutation) return checked_product(dims_);
    Index d = 1;
    for (std::size_t f : factors_) d *= dims_[f];
    return d;
}

State Unitary::apply(const State& psi) const {
    if (psi.dims() != dims_) throw Error(ErrorKind::DimensionMismatch, "unitary and state factor dims differ");
    if (kind_ == Kind::Identity) return psi;
    if (kind_ == Kind::FactorPermutation) return psi.permute_factors(factors_);

    const auto& blocks = psi.blocks();
    auto offs = psi.block_offsets();
    std::size_t lo = blocks.size(), hi = 0;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        for (std::size_t f : factors_) {
            if (f >= offs[k] && f < offs[k] + blocks[k]->dims.size()) {
                lo = std::min(lo, k);
                hi = std::max(hi, k);
            }
        }
    }
    std::vector<State::BlockPtr> span(blocks.begin() + static_cast<std::ptrdiff_t>(lo),
                                      blocks.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    Dims local_dims;
    for (const auto& b : span) local_dims.insert(local_dims.end(), b->dims.begin(), b->dims.end());
    std::vector<std::size_t> local_factors;
    for (std::size_t f : factors_) local_factors.push_back(f - offs[lo]);
    std::vector<Entry> entries = expand_blocks(span);

    std::vector<Entry> out;
    if (kind_ == Kind::Dense) {
        out = apply_local(entries, local_dims, local_factors, matrix_);
    } else {
        LocalSplit split(local_dims, local_factors);
        const Index d = local_dim();
        const bool verify = d > kExhaustiveCheck;
        out.reserve(entries.size());
        for (const auto& e : entries) {
            Index l = split.local_of(e.index);
            Index y = forward_(l);
            if (y >= d || (verify && inverse_(y) != l))
                throw Error(ErrorKind::NotUnitary, "index map is not a bijection on the state support");
            out.push_back({split.compose(split.rest_of(e.index), y), e.amp});
        }
        sort_and_check(out);
    }
    auto nb = std::make_shared<State::Block>();
    nb->dims = local_dims;
    nb->dim = checked_product(local_dims);
    nb->entries = std::move(out);
    std::vector<State::BlockPtr> result(blocks.begin(), blocks.begin() + static_cast<std::ptrdiff_t>(lo));
    result.push_back(std::move(nb));
    result.insert(result.end(), blocks.begin() + static_cast<std::ptrdiff_t>(hi) + 1, blocks.end());
    return State(State::Unchecked{}, dims_, std::move(result));
}

Unitary Unitary::inverse() const {
    Unitary u = *this;
    switch (kind_) {
        case Kind::Identity:
            break;
        case Kind::Dense:
            u.matrix_ = matrix_.adjoint();
            break;
        case Kind::IndexMap:
            std::swap(u.forward_, u.inverse_);
            break;
        case Kind::FactorPermutation: {
            u.dims_ = output_dims();
            std::vector<std::size_t> inv(factors_.size());
            for (std::size_t p = 0; p < factors_.size(); ++p) inv[factors_[p]] = p;
            u.factors_ = std::move(inv);
            break;
        }
    }
    if (kind_ != Kind::Identity) u.name_ = name_ + "^-1";
    return u;
}

Eigen::MatrixXcd Unitary::local_matrix() const {
    if (kind_ == Kind::Dense) return matrix_;
    if (kind_ != Kind::IndexMap) throw Error(ErrorKind::Unsupported, "no local matrix for this unitary kind");
    Index d = local_dim();
    if (d > kDenseIndexMap) throw Error(ErrorKind::Unsupported, "index map too large for a dense matrix");
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (Index x = 0; x < d; ++x) m(static_cast<Eigen::Index>(forward_(x)), static_cast<Eigen::Index>(x)) = 1.0;
    return m;
}

MeasurementContext Unitary::conjugate(const MeasurementContext& ctx) const {
    if (ctx.dims() != output_dims())
        throw Error(ErrorKind::DimensionMismatch, "context is not on the unitary's output space");
    if (kind_ == Kind::Identity) return ctx;
    std::vector<ContextEntry> out;
    if (kind_ == Kind::FactorPermutation) {
        for (const auto& e : ctx.entries()) {
            ContextEntry n = e;
            for (auto& f : n.factors) f = factors_[f];
            out.push_back(std::move(n));
        }
        return MeasurementContext(dims_, std::move(out));
    }
    for (const auto& e : ctx.entries()) {
        bool touches = false;
        for (std::size_t f : e.factors)
            if (std::find(factors_.begin(), factors_.end(), f) != factors_.end()) touches = true;
        if (!touches) {
            out.push_back(e);
            continue;
        }
        std::vector<std::size_t> r = e.factors;
        r.insert(r.end(), factors_.begin(), factors_.end());
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        auto z = embed_operator(e.observable.matrix(), e.factors, r, dims_);
        auto u = embed_operator(local_matrix(), factors_, r, dims_);
        Eigen::MatrixXcd c = u.adjoint() * z * u;
        out.push_back({Observable(c), r, e.party});
    }
    return MeasurementContext(dims_, std::move(out));
}

}  // namespace crq::qcore
