#include "crq/qcore/born.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace crq::qcore {

namespace {

struct Component {
    std::vector<std::size_t> factors;   // sorted
    std::vector<Index> strides;         // global stride of each factor
    Dims local_dims;
    Index local_dim = 1;
    std::vector<std::size_t> offset;    // flat outcome contribution per local basis vector
    bool rotate = false;
    std::vector<std::uint32_t> block_of;
    std::vector<std::uint32_t> pos_in_block;
    std::vector<Observable::Block> blocks;

    Index local_of(Index index) const {
        Index l = 0;
        for (std::size_t k = 0; k < factors.size(); ++k)
            l = l * local_dims[k] + (index / strides[k]) % local_dims[k];
        return l;
    }
    Index with_local(Index index, Index local) const {
        for (std::size_t k = factors.size(); k-- > 0;) {
            Index old = (index / strides[k]) % local_dims[k];
            Index nd = local % local_dims[k];
            local /= local_dims[k];
            index = index - old * strides[k] + nd * strides[k];
        }
        return index;
    }
};

// Local index of R (sorted) for each local index of an entry's own factor order.
std::vector<Index> entry_to_sorted(const std::vector<std::size_t>& factors, const std::vector<std::size_t>& sorted,
                                   const Dims& dims) {
    Index d = 1;
    for (std::size_t f : factors) d *= dims[f];
    std::vector<Index> map(d);
    std::vector<Index> digits(factors.size());
    for (Index x = 0; x < d; ++x) {
        Index y = x;
        for (std::size_t k = factors.size(); k-- > 0;) {
            digits[k] = y % dims[factors[k]];
            y /= dims[factors[k]];
        }
        Index r = 0;
        for (std::size_t f : sorted) {
            auto it = std::find(factors.begin(), factors.end(), f);
            r = r * dims[f] + digits[static_cast<std::size_t>(it - factors.begin())];
        }
        map[x] = r;
    }
    return map;
}

void finish_blocks(Component& c) {
    c.block_of.assign(c.local_dim, 0);
    c.pos_in_block.assign(c.local_dim, 0);
    for (std::size_t b = 0; b < c.blocks.size(); ++b) {
        if (c.blocks[b].indices.size() > 1) c.rotate = true;
        for (std::size_t p = 0; p < c.blocks[b].indices.size(); ++p) {
            c.block_of[c.blocks[b].indices[p]] = static_cast<std::uint32_t>(b);
            c.pos_in_block[c.blocks[b].indices[p]] = static_cast<std::uint32_t>(p);
        }
    }
}

std::vector<Component> build_components(const MeasurementContext& ctx) {
    const auto& entries = ctx.entries();
    const auto& dims = ctx.dims();
    const std::size_t n = entries.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            for (std::size_t f : entries[a].factors)
                if (std::find(entries[b].factors.begin(), entries[b].factors.end(), f) != entries[b].factors.end())
                    parent[find(a)] = find(b);

    std::vector<std::size_t> outcome_stride(n, 1);
    for (std::size_t k = n; k-- > 1;) outcome_stride[k - 1] = outcome_stride[k] * entries[k].observable.outcome_count();

    std::vector<Index> global_stride(dims.size(), 1);
    for (std::size_t f = dims.size(); f-- > 1;) global_stride[f - 1] = global_stride[f] * dims[f];

    std::vector<Component> comps;
    for (std::size_t root = 0; root < n; ++root) {
        if (find(root) != root) continue;
        std::vector<std::size_t> members;
        for (std::size_t k = 0; k < n; ++k)
            if (find(k) == root) members.push_back(k);
        Component c;
        for (std::size_t k : members) c.factors.insert(c.factors.end(), entries[k].factors.begin(), entries[k].factors.end());
        std::sort(c.factors.begin(), c.factors.end());
        c.factors.erase(std::unique(c.factors.begin(), c.factors.end()), c.factors.end());
        for (std::size_t f : c.factors) {
            c.strides.push_back(global_stride[f]);
            c.local_dims.push_back(dims[f]);
            c.local_dim *= dims[f];
        }
        c.offset.assign(c.local_dim, 0);

        if (members.size() == 1) {
            const auto& e = entries[members.front()];
            auto map = entry_to_sorted(e.factors, c.factors, dims);
            for (const auto& b : e.observable.blocks()) {
                Observable::Block nb = b;
                for (auto& i : nb.indices) i = map[i];
                for (std::size_t col = 0; col < b.labels.size(); ++col)
                    c.offset[nb.indices[col]] = b.labels[col] * outcome_stride[members.front()];
                c.blocks.push_back(std::move(nb));
            }
        } else {
            std::vector<Eigen::MatrixXcd> ops;
            Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(c.local_dim),
                                                        static_cast<Eigen::Index>(c.local_dim));
            for (std::size_t j = 0; j < members.size(); ++j) {
                const auto& e = entries[members[j]];
                ops.push_back(embed_operator(e.observable.matrix(), e.factors, c.factors, dims));
                double w = 1.0 + 0.6180339887498949 * static_cast<double>(j) + 0.0137 * static_cast<double>(j * j);
                h += w * ops.back();
            }
            Observable joint(h);
            for (const auto& b : joint.blocks()) {
                Observable::Block nb = b;
                for (std::size_t col = 0; col < b.labels.size(); ++col) {
                    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(c.local_dim));
                    for (std::size_t i = 0; i < b.indices.size(); ++i)
                        v(static_cast<Eigen::Index>(b.indices[i])) = b.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col));
                    std::size_t off = 0;
                    for (std::size_t j = 0; j < members.size(); ++j) {
                        double rq = v.dot(ops[j] * v).real();
                        auto idx = entries[members[j]].observable.eigen_index(rq);
                        if (!idx) {
                            // fall back to the nearest eigenvalue after checking it is an eigenvector
                            const auto& ev = entries[members[j]].observable.eigenvalues();
                            std::size_t best = 0;
                            for (std::size_t t = 1; t < ev.size(); ++t)
                                if (std::abs(ev[t] - rq) < std::abs(ev[best] - rq)) best = t;
                            if (std::abs(ev[best] - rq) > 1e-6)
                                throw Error(ErrorKind::Unsupported, "failed to find a joint eigenbasis");
                            idx = best;
                        }
                        off += *idx * outcome_stride[members[j]];
                    }
                    c.offset[b.indices[col]] = off;
                }
                c.blocks.push_back(std::move(nb));
            }
        }
        finish_blocks(c);
        comps.push_back(std::move(c));
    }
    return comps;
}

}  // namespace

std::vector<double> born_distribution(const State& psi, const MeasurementContext& ctx) {
    if (psi.dimension() != ctx.total_dimension())
        throw Error(ErrorKind::DimensionMismatch, "state and context live on different spaces");

    MeasurementContext c = ctx;
    std::vector<Entry> entries;
    if (psi.dims() == ctx.dims() && psi.blocks().size() > 1) {
        // keep only the product blocks the context touches
        const auto& blocks = psi.blocks();
        auto offs = psi.block_offsets();
        std::vector<bool> touched(blocks.size(), false);
        std::vector<std::size_t> owner(psi.factor_count());
        for (std::size_t k = 0; k < blocks.size(); ++k)
            for (std::size_t j = 0; j < blocks[k]->dims.size(); ++j) owner[offs[k] + j] = k;
        for (const auto& e : ctx.entries())
            for (std::size_t f : e.factors) touched[owner[f]] = true;
        std::vector<State::BlockPtr> kept;
        std::vector<std::size_t> remap(psi.factor_count());
        Dims dims;
        for (std::size_t k = 0; k < blocks.size(); ++k) {
            if (!touched[k]) continue;
            kept.push_back(blocks[k]);
            for (std::size_t j = 0; j < blocks[k]->dims.size(); ++j) {
                remap[offs[k] + j] = dims.size();
                dims.push_back(blocks[k]->dims[j]);
            }
        }
        std::vector<ContextEntry> ce;
        for (const auto& e : ctx.entries()) {
            ContextEntry n = e;
            for (auto& f : n.factors) f = remap[f];
            ce.push_back(std::move(n));
        }
        c = MeasurementContext(std::move(dims), std::move(ce));
        entries = expand_blocks(kept);
    } else {
        entries = psi.entries();
    }

    auto comps = build_components(c);
    for (const auto& comp : comps) {
        if (!comp.rotate) continue;
        std::unordered_map<Index, Complex> next;
        next.reserve(entries.size() * 2);
        for (const auto& e : entries) {
            Index l = comp.local_of(e.index);
            const auto& b = comp.blocks[comp.block_of[l]];
            const auto p = static_cast<Eigen::Index>(comp.pos_in_block[l]);
            for (std::size_t col = 0; col < b.indices.size(); ++col) {
                Complex a = std::conj(b.vectors(p, static_cast<Eigen::Index>(col))) * e.amp;
                if (a == Complex{}) continue;
                next[comp.with_local(e.index, b.indices[col])] += a;
            }
        }
        entries.clear();
        entries.reserve(next.size());
        for (const auto& [i, a] : next) entries.push_back({i, a});
    }

    std::vector<double> dist(ctx.outcome_count(), 0.0);
    for (const auto& e : entries) {
        std::size_t flat = 0;
        for (const auto& comp : comps) flat += comp.offset[comp.local_of(e.index)];
        dist[flat] += std::norm(e.amp);
    }
    return dist;
}

double born_probability(const State& psi, const MeasurementContext& ctx, std::span<const double> values) {
    auto idx = ctx.outcome_index(values);
    if (!idx) return 0.0;
    return born_distribution(psi, ctx)[*idx];
}

}  // namespace crq::qcore
