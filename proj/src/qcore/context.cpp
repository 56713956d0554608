#include "crq/qcore/context.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "crq/qcore/state.hpp"

namespace crq::qcore {

namespace {

constexpr double kCommuteTol = 1e-10;

Index factor_product(const Dims& dims, const std::vector<std::size_t>& factors) {
    Index p = 1;
    for (std::size_t f : factors) p *= dims[f];
    return p;
}

bool overlaps(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    for (std::size_t x : a)
        if (std::find(b.begin(), b.end(), x) != b.end()) return true;
    return false;
}

// Permute an operator's local basis so that its factor list becomes sorted.
ContextEntry sorted_entry(const ContextEntry& e, const Dims& dims) {
    std::vector<std::size_t> sorted = e.factors;
    std::sort(sorted.begin(), sorted.end());
    if (sorted == e.factors) return e;
    return {Observable(embed_operator(e.observable.matrix(), e.factors, sorted, dims)), sorted, e.party};
}

}  // namespace

MeasurementContext::MeasurementContext(Dims dims, std::vector<ContextEntry> entries)
    : dims_(std::move(dims)), entries_(std::move(entries)) {
    if (dims_.empty()) throw Error(ErrorKind::MalformedContext, "context needs at least one factor");
    if (entries_.empty()) throw Error(ErrorKind::MalformedContext, "context has no observables");
    total_ = checked_product(dims_);
    for (const auto& e : entries_) {
        if (e.factors.empty()) throw Error(ErrorKind::MalformedContext, "observable acts on no factor");
        std::set<std::size_t> seen;
        for (std::size_t f : e.factors) {
            if (f >= dims_.size()) throw Error(ErrorKind::MalformedContext, "factor index out of range");
            if (!seen.insert(f).second) throw Error(ErrorKind::MalformedContext, "repeated factor");
        }
        if (e.observable.dim() != factor_product(dims_, e.factors))
            throw Error(ErrorKind::DimensionMismatch, "observable size does not match its factors");
    }
    for (std::size_t a = 0; a < entries_.size(); ++a) {
        for (std::size_t b = a + 1; b < entries_.size(); ++b) {
            const auto& ea = entries_[a];
            const auto& eb = entries_[b];
            if (!overlaps(ea.factors, eb.factors)) continue;
            std::vector<std::size_t> u = ea.factors;
            u.insert(u.end(), eb.factors.begin(), eb.factors.end());
            std::sort(u.begin(), u.end());
            u.erase(std::unique(u.begin(), u.end()), u.end());
            auto ma = embed_operator(ea.observable.matrix(), ea.factors, u, dims_);
            auto mb = embed_operator(eb.observable.matrix(), eb.factors, u, dims_);
            double scale = std::max(1.0, max_abs(ma) * max_abs(mb));
            if (max_abs(ma * mb - mb * ma) > kCommuteTol * scale)
                throw Error(ErrorKind::MalformedContext, "observables in a context do not commute");
        }
    }
}

MeasurementContext MeasurementContext::single(Dims dims, Observable obs, std::vector<std::size_t> factors,
                                              Party party) {
    std::vector<ContextEntry> e;
    e.push_back({std::move(obs), std::move(factors), party});
    return MeasurementContext(std::move(dims), std::move(e));
}

MeasurementContext MeasurementContext::whole(Observable obs) {
    Dims d{obs.dim()};
    return single(std::move(d), std::move(obs), {0});
}

std::vector<std::size_t> MeasurementContext::shape() const {
    std::vector<std::size_t> s;
    for (const auto& e : entries_) s.push_back(e.observable.outcome_count());
    return s;
}

std::size_t MeasurementContext::outcome_count() const {
    std::size_t n = 1;
    for (const auto& e : entries_) n *= e.observable.outcome_count();
    return n;
}

std::size_t MeasurementContext::flat_index(std::span<const std::size_t> indices) const {
    if (indices.size() != entries_.size()) throw Error(ErrorKind::DimensionMismatch, "outcome tuple length");
    std::size_t flat = 0;
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        std::size_t n = entries_[k].observable.outcome_count();
        if (indices[k] >= n) throw Error(ErrorKind::IndexOutOfRange, "outcome index");
        flat = flat * n + indices[k];
    }
    return flat;
}

std::vector<std::size_t> MeasurementContext::unflatten(std::size_t flat) const {
    std::vector<std::size_t> idx(entries_.size());
    for (std::size_t k = entries_.size(); k-- > 0;) {
        std::size_t n = entries_[k].observable.outcome_count();
        idx[k] = flat % n;
        flat /= n;
    }
    return idx;
}

std::optional<std::size_t> MeasurementContext::outcome_index(std::span<const double> values) const {
    if (values.size() != entries_.size()) throw Error(ErrorKind::DimensionMismatch, "outcome tuple length");
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        auto i = entries_[k].observable.eigen_index(values[k]);
        if (!i) return std::nullopt;
        idx.push_back(*i);
    }
    return flat_index(idx);
}

std::vector<double> MeasurementContext::outcome_values(std::size_t flat) const {
    auto idx = unflatten(flat);
    std::vector<double> v;
    for (std::size_t k = 0; k < idx.size(); ++k) v.push_back(entries_[k].observable.eigenvalues()[idx[k]]);
    return v;
}

std::optional<std::size_t> MeasurementContext::entry_for_party(Party party) const {
    std::optional<std::size_t> found;
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        if (entries_[k].party != party) continue;
        if (found) return std::nullopt;
        found = k;
    }
    return found;
}

MeasurementContext MeasurementContext::sub_context(const std::vector<std::size_t>& entry_ids) const {
    std::vector<ContextEntry> e;
    for (std::size_t k : entry_ids) e.push_back(entries_.at(k));
    return MeasurementContext(dims_, std::move(e));
}

MeasurementContext MeasurementContext::extended(const Dims& extra) const {
    Dims d = dims_;
    d.insert(d.end(), extra.begin(), extra.end());
    return MeasurementContext(std::move(d), entries_);
}

MeasurementContext MeasurementContext::canonical() const {
    std::vector<ContextEntry> sorted;
    for (const auto& e : entries_) sorted.push_back(sorted_entry(e, dims_));

    const std::size_t f = dims_.size();
    std::vector<std::vector<std::size_t>> signature(f);
    for (std::size_t k = 0; k < sorted.size(); ++k)
        for (std::size_t x : sorted[k].factors) signature[x].push_back(k);

    // group consecutive factors touched by exactly the same entries
    std::vector<std::size_t> group_of(f);
    Dims group_dims;
    std::vector<bool> group_touched;
    for (std::size_t x = 0; x < f; ++x) {
        if (x > 0 && signature[x] == signature[x - 1]) {
            group_of[x] = group_dims.size() - 1;
            group_dims.back() *= dims_[x];
        } else {
            group_of[x] = group_dims.size();
            group_dims.push_back(dims_[x]);
            group_touched.push_back(!signature[x].empty());
        }
    }
    // drop untouched trivial groups
    std::vector<std::size_t> remap(group_dims.size());
    Dims final_dims;
    for (std::size_t g = 0; g < group_dims.size(); ++g) {
        if (!group_touched[g] && group_dims[g] == 1) continue;
        remap[g] = final_dims.size();
        final_dims.push_back(group_dims[g]);
    }
    if (final_dims.empty()) final_dims.push_back(1);

    std::vector<ContextEntry> out;
    for (auto& e : sorted) {
        std::vector<std::size_t> fac;
        for (std::size_t x : e.factors) {
            std::size_t g = remap[group_of[x]];
            if (fac.empty() || fac.back() != g) fac.push_back(g);
        }
        out.push_back({e.observable, std::move(fac), e.party});
    }
    return MeasurementContext(std::move(final_dims), std::move(out));
}

bool MeasurementContext::same_as(const MeasurementContext& other, double tol) const {
    if (total_ != other.total_ || entries_.size() != other.entries_.size()) return false;
    auto a = canonical();
    auto b = other.canonical();
    if (a.dims_ != b.dims_) return false;
    for (std::size_t k = 0; k < a.entries_.size(); ++k) {
        if (a.entries_[k].factors != b.entries_[k].factors) return false;
        if (!a.entries_[k].observable.same_as(b.entries_[k].observable, tol)) return false;
    }
    return true;
}

std::vector<double> marginalize(const MeasurementContext& ctx, const std::vector<double>& dist,
                                const std::vector<std::size_t>& keep) {
    auto shape = ctx.shape();
    std::size_t out_n = 1;
    for (std::size_t k : keep) out_n *= shape.at(k);
    std::vector<double> out(out_n, 0.0);
    for (std::size_t flat = 0; flat < dist.size(); ++flat) {
        if (dist[flat] == 0.0) continue;
        auto idx = ctx.unflatten(flat);
        std::size_t o = 0;
        for (std::size_t k : keep) o = o * shape[k] + idx[k];
        out[o] += dist[flat];
    }
    return out;
}

}  // namespace crq::qcore
