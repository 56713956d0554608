#pragma once

#include <optional>
#include <span>
#include <vector>

#include "crq/qcore/observable.hpp"

namespace crq::qcore {

enum class Party { Single, A, B };

struct ContextEntry {
    Observable observable;
    std::vector<std::size_t> factors;  // tensor factors the observable acts on, in matrix order
    Party party = Party::Single;
};

/// A set of pairwise commuting observables measured together.
///
/// Outcomes are tuples of eigenvalue indices, one per entry, flattened
/// row-major with the first entry most significant.
class MeasurementContext {
public:
    MeasurementContext() = default;
    MeasurementContext(Dims dims, std::vector<ContextEntry> entries);

    static MeasurementContext single(Dims dims, Observable obs, std::vector<std::size_t> factors,
                                     Party party = Party::Single);
    /// One observable acting on the whole space of dimension obs.dim().
    static MeasurementContext whole(Observable obs);

    const Dims& dims() const { return dims_; }
    Index total_dimension() const { return total_; }
    const std::vector<ContextEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    std::vector<std::size_t> shape() const;
    std::size_t outcome_count() const;
    std::size_t flat_index(std::span<const std::size_t> indices) const;
    std::vector<std::size_t> unflatten(std::size_t flat) const;
    /// Flat index of a tuple of eigenvalues; empty when any value is off-spectrum.
    std::optional<std::size_t> outcome_index(std::span<const double> values) const;
    std::vector<double> outcome_values(std::size_t flat) const;

    std::optional<std::size_t> entry_for_party(Party party) const;
    MeasurementContext sub_context(const std::vector<std::size_t>& entry_ids) const;
    /// The same observables on a state space with extra trailing factors.
    MeasurementContext extended(const Dims& extra) const;

    /// Coarsest equivalent factorization: untouched neighbouring factors are
    /// merged, factor lists are sorted and untouched trivial factors dropped.
    MeasurementContext canonical() const;
    /// Same operators on the same total space, compared as canonical forms.
    bool same_as(const MeasurementContext& other, double tol = 1e-12) const;

private:
    Dims dims_;
    Index total_ = 0;
    std::vector<ContextEntry> entries_;
};

/// Marginal of a joint distribution onto a subset of entries.
std::vector<double> marginalize(const MeasurementContext& ctx, const std::vector<double>& dist,
                                const std::vector<std::size_t>& keep);

}  // namespace crq::qcore
