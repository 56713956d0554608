#include "crq/qcore/state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace crq {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NonHermitian: return "NonHermitian";
        case ErrorKind::NotUnitary: return "NotUnitary";
        case ErrorKind::NotNormalized: return "NotNormalized";
        case ErrorKind::NotOrthonormal: return "NotOrthonormal";
        case ErrorKind::MalformedContext: return "MalformedContext";
        case ErrorKind::UncoveredContext: return "UncoveredContext";
        case ErrorKind::EmptyEvent: return "EmptyEvent";
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::FactorMismatch: return "FactorMismatch";
        case ErrorKind::BadProjectors: return "BadProjectors";
        case ErrorKind::CoefficientMismatch: return "CoefficientMismatch";
        case ErrorKind::ApproxInfeasible: return "ApproxInfeasible";
        case ErrorKind::DimensionBudgetExceeded: return "DimensionBudgetExceeded";
        case ErrorKind::AxiomViolation: return "AxiomViolation";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::Unsupported: return "Unsupported";
        case ErrorKind::Parse: return "Parse";
    }
    return "Unknown";
}

}  // namespace crq

namespace crq::qcore {

namespace {

constexpr double kNormTol = 1e-12;

void sort_entries(std::vector<Entry>& entries) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.index < b.index; });
}

double squared_norm(const std::vector<Entry>& entries) {
    double s = 0.0;
    for (const auto& e : entries) s += std::norm(e.amp);
    return s;
}

Complex block_amplitude(const State::Block& b, Index local) {
    auto it = std::lower_bound(b.entries.begin(), b.entries.end(), local,
                               [](const Entry& e, Index v) { return e.index < v; });
    if (it != b.entries.end() && it->index == local) return it->amp;
    return {};
}

Complex block_inner(const State::Block& a, const State::Block& b) {
    Complex s{};
    auto ia = a.entries.begin();
    auto ib = b.entries.begin();
    while (ia != a.entries.end() && ib != b.entries.end()) {
        if (ia->index < ib->index) {
            ++ia;
        } else if (ib->index < ia->index) {
            ++ib;
        } else {
            s += std::conj(ia->amp) * ib->amp;
            ++ia;
            ++ib;
        }
    }
    return s;
}

}  // namespace

Index checked_product(const Dims& dims) {
    Index p = 1;
    for (Index d : dims) {
        if (d == 0) throw Error(ErrorKind::InvalidArgument, "zero-dimensional factor");
        if (p > std::numeric_limits<Index>::max() / 2 / d)
            throw Error(ErrorKind::InvalidArgument, "dimension overflows 64-bit index");
        p *= d;
    }
    return p;
}

std::vector<Index> unravel(Index index, const Dims& dims) {
    std::vector<Index> digits(dims.size());
    for (std::size_t f = dims.size(); f-- > 0;) {
        digits[f] = index % dims[f];
        index /= dims[f];
    }
    return digits;
}

Index ravel(const std::vector<Index>& digits, const Dims& dims) {
    Index idx = 0;
    for (std::size_t f = 0; f < dims.size(); ++f) idx = idx * dims[f] + digits[f];
    return idx;
}

State::State(Dims dims, std::vector<Entry> entries) : dims_(std::move(dims)) {
    if (dims_.empty()) throw Error(ErrorKind::InvalidArgument, "state needs at least one factor");
    dimension_ = checked_product(dims_);
    sort_entries(entries);
    std::vector<Entry> clean;
    clean.reserve(entries.size());
    for (const auto& e : entries) {
        if (e.index >= dimension_)
            throw Error(ErrorKind::IndexOutOfRange, "amplitude index outside the state space");
        if (!std::isfinite(e.amp.real()) || !std::isfinite(e.amp.imag()))
            throw Error(ErrorKind::InvalidArgument, "non-finite amplitude");
        if (!clean.empty() && clean.back().index == e.index)
            throw Error(ErrorKind::InvalidArgument, "duplicate amplitude index");
        if (e.amp != Complex{}) clean.push_back(e);
    }
    double n2 = squared_norm(clean);
    if (std::abs(n2 - 1.0) > kNormTol) {
        std::ostringstream os;
        os << "squared norm " << n2 << " differs from 1";
        throw Error(ErrorKind::NotNormalized, os.str());
    }
    auto b = std::make_shared<Block>();
    b->dims = dims_;
    b->dim = dimension_;
    b->entries = std::move(clean);
    blocks_.push_back(std::move(b));
}

State::State(Unchecked, Dims dims, std::vector<BlockPtr> blocks)
    : dims_(std::move(dims)), dimension_(checked_product(dims_)), blocks_(std::move(blocks)) {}

State State::from_dense(Dims dims, const std::vector<Complex>& amps) {
    Index dim = checked_product(dims);
    if (amps.size() != dim) throw Error(ErrorKind::DimensionMismatch, "amplitude vector length");
    std::vector<Entry> entries;
    for (Index i = 0; i < dim; ++i)
        if (amps[i] != Complex{}) entries.push_back({i, amps[i]});
    return State(std::move(dims), std::move(entries));
}

State State::basis(Dims dims, Index index) {
    return State(std::move(dims), {{index, Complex{1.0, 0.0}}});
}

State State::normalized(Dims dims, std::vector<Entry> entries) {
    double n2 = squared_norm(entries);
    if (!(n2 > 0.0)) throw Error(ErrorKind::NotNormalized, "zero vector");
    double s = 1.0 / std::sqrt(n2);
    for (auto& e : entries) e.amp *= s;
    return State(std::move(dims), std::move(entries));
}

std::vector<std::size_t> State::block_offsets() const {
    std::vector<std::size_t> off;
    std::size_t f = 0;
    for (const auto& b : blocks_) {
        off.push_back(f);
        f += b->dims.size();
    }
    return off;
}

std::uint64_t State::nonzeros() const {
    std::uint64_t n = 1;
    for (const auto& b : blocks_) n *= b->entries.size();
    return blocks_.empty() ? 0 : n;
}

std::uint64_t State::stored_nonzeros() const {
    std::uint64_t n = 0;
    for (const auto& b : blocks_) n += b->entries.size();
    return n;
}

std::vector<Entry> expand_blocks(const std::vector<State::BlockPtr>& blocks) {
    std::vector<Entry> cur{{0, Complex{1.0, 0.0}}};
    for (const auto& b : blocks) {
        std::vector<Entry> next;
        next.reserve(cur.size() * b->entries.size());
        for (const auto& x : cur)
            for (const auto& y : b->entries) next.push_back({x.index * b->dim + y.index, x.amp * y.amp});
        cur = std::move(next);
    }
    return cur;
}

std::vector<Entry> State::entries() const {
    if (blocks_.size() == 1) return blocks_.front()->entries;
    return expand_blocks(blocks_);
}

State State::flattened() const {
    if (blocks_.size() <= 1) return *this;
    auto b = std::make_shared<Block>();
    b->dims = dims_;
    b->dim = dimension_;
    b->entries = expand_blocks(blocks_);
    return State(Unchecked{}, dims_, {std::move(b)});
}

State State::reshaped(Dims dims) const {
    if (checked_product(dims) != dimension_)
        throw Error(ErrorKind::DimensionMismatch, "reshape changes the total dimension");
    auto b = std::make_shared<Block>();
    b->dims = dims;
    b->dim = dimension_;
    b->entries = entries();
    return State(Unchecked{}, std::move(dims), {std::move(b)});
}

Complex State::amplitude(Index index) const {
    if (index >= dimension_) throw Error(ErrorKind::IndexOutOfRange, "amplitude index");
    Complex a{1.0, 0.0};
    for (std::size_t k = blocks_.size(); k-- > 0;) {
        const auto& b = *blocks_[k];
        a *= block_amplitude(b, index % b.dim);
        if (a == Complex{}) return a;
        index /= b.dim;
    }
    return a;
}

std::vector<Complex> State::to_dense() const {
    if (dimension_ > (Index{1} << 26))
        throw Error(ErrorKind::DimensionBudgetExceeded, "state too large for a dense vector");
    std::vector<Complex> v(dimension_);
    for (const auto& e : entries()) v[e.index] = e.amp;
    return v;
}

double State::norm() const {
    double n = 1.0;
    for (const auto& b : blocks_) n *= std::sqrt(squared_norm(b->entries));
    return n;
}

State State::tensor(const State& other) const {
    Dims d = dims_;
    d.insert(d.end(), other.dims_.begin(), other.dims_.end());
    auto blocks = blocks_;
    blocks.insert(blocks.end(), other.blocks_.begin(), other.blocks_.end());
    return State(Unchecked{}, std::move(d), std::move(blocks));
}

State::Block permute_block(const State::Block& block, const std::vector<std::size_t>& order) {
    State::Block out;
    out.dim = block.dim;
    for (std::size_t p : order) out.dims.push_back(block.dims[p]);
    out.entries.reserve(block.entries.size());
    const std::size_t f = block.dims.size();
    std::vector<Index> digits(f), moved(f);
    for (const auto& e : block.entries) {
        Index idx = e.index;
        for (std::size_t k = f; k-- > 0;) {
            digits[k] = idx % block.dims[k];
            idx /= block.dims[k];
        }
        Index n = 0;
        for (std::size_t p = 0; p < f; ++p) n = n * out.dims[p] + digits[order[p]];
        out.entries.push_back({n, e.amp});
    }
    sort_entries(out.entries);
    return out;
}

State State::permute_factors(const std::vector<std::size_t>& order) const {
    const std::size_t f = dims_.size();
    if (order.size() != f) throw Error(ErrorKind::FactorMismatch, "permutation length");
    std::vector<bool> seen(f, false);
    for (std::size_t p : order) {
        if (p >= f || seen[p]) throw Error(ErrorKind::FactorMismatch, "not a permutation");
        seen[p] = true;
    }
    // block owning each old factor, and new position of each old factor
    std::vector<std::size_t> owner(f), pos(f);
    auto offs = block_offsets();
    for (std::size_t k = 0; k < blocks_.size(); ++k)
        for (std::size_t j = 0; j < blocks_[k]->dims.size(); ++j) owner[offs[k] + j] = k;
    for (std::size_t p = 0; p < f; ++p) pos[order[p]] = p;

    // merge blocks until each group occupies a contiguous run of new positions
    std::vector<std::size_t> group(blocks_.size());
    std::iota(group.begin(), group.end(), 0);
    auto find = [&](std::size_t x) {
        while (group[x] != x) x = group[x] = group[group[x]];
        return x;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<std::size_t> lo(blocks_.size(), f), hi(blocks_.size(), 0);
        for (std::size_t old = 0; old < f; ++old) {
            std::size_t g = find(owner[old]);
            lo[g] = std::min(lo[g], pos[old]);
            hi[g] = std::max(hi[g], pos[old]);
        }
        for (std::size_t p = 0; p < f; ++p) {
            std::size_t g = find(owner[order[p]]);
            for (std::size_t h = 0; h < blocks_.size(); ++h) {
                if (find(h) != h || h == g) continue;
                if (lo[h] <= p && p <= hi[h]) {
                    group[g] = h;
                    changed = true;
                    break;
                }
            }
            if (changed) break;
        }
    }

    Dims new_dims(f);
    for (std::size_t p = 0; p < f; ++p) new_dims[p] = dims_[order[p]];
    std::vector<BlockPtr> out;
    std::size_t p = 0;
    while (p < f) {
        std::size_t g = find(owner[order[p]]);
        std::size_t q = p;
        while (q < f && find(owner[order[q]]) == g) ++q;
        std::vector<std::size_t> members;
        for (std::size_t k = 0; k < blocks_.size(); ++k)
            if (find(k) == g) members.push_back(k);
        // old factors spanned by the group, in old order
        std::vector<std::size_t> olds;
        std::vector<BlockPtr> parts;
        for (std::size_t k : members) {
            parts.push_back(blocks_[k]);
            for (std::size_t j = 0; j < blocks_[k]->dims.size(); ++j) olds.push_back(offs[k] + j);
        }
        std::vector<std::size_t> local(q - p);
        bool identity = true;
        for (std::size_t r = p; r < q; ++r) {
            auto it = std::find(olds.begin(), olds.end(), order[r]);
            local[r - p] = static_cast<std::size_t>(it - olds.begin());
            if (local[r - p] != r - p) identity = false;
        }
        if (members.size() == 1 && identity) {
            out.push_back(blocks_[members.front()]);
        } else {
            Block merged;
            for (const auto& b : parts) merged.dims.insert(merged.dims.end(), b->dims.begin(), b->dims.end());
            merged.dim = checked_product(merged.dims);
            merged.entries = expand_blocks(parts);
            out.push_back(std::make_shared<Block>(identity ? std::move(merged) : permute_block(merged, local)));
        }
        p = q;
    }
    return State(Unchecked{}, std::move(new_dims), std::move(out));
}

Complex inner(const State& a, const State& b) {
    if (a.dimension() != b.dimension())
        throw Error(ErrorKind::DimensionMismatch, "inner product of states on different spaces");
    const auto& ba = a.blocks();
    const auto& bb = b.blocks();
    bool aligned = ba.size() == bb.size();
    for (std::size_t k = 0; aligned && k < ba.size(); ++k) aligned = ba[k]->dim == bb[k]->dim;
    if (aligned) {
        Complex s{1.0, 0.0};
        for (std::size_t k = 0; k < ba.size(); ++k) {
            s *= ba[k] == bb[k] ? Complex{squared_norm(ba[k]->entries), 0.0} : block_inner(*ba[k], *bb[k]);
            if (s == Complex{}) break;
        }
        return s;
    }
    Complex s{};
    if (a.nonzeros() <= b.nonzeros()) {
        for (const auto& e : a.entries()) s += std::conj(e.amp) * b.amplitude(e.index);
    } else {
        for (const auto& e : b.entries()) s += std::conj(a.amplitude(e.index)) * e.amp;
    }
    return s;
}

double overlap_epsilon(const State& a, const State& b) {
    return std::max(0.0, 1.0 - std::abs(inner(a, b)));
}

State tensor(const std::vector<State>& parts) {
    if (parts.empty()) throw Error(ErrorKind::InvalidArgument, "empty tensor product");
    State s = parts.front();
    for (std::size_t k = 1; k < parts.size(); ++k) s = s.tensor(parts[k]);
    return s;
}

}  // namespace crq::qcore
