#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crq/qcore/context.hpp"
#include "crq/qcore/state.hpp"

namespace crq::qcore {

/// Unitary acting on a tensor product space, either as a dense matrix on a
/// subset of factors, a basis permutation on a subset of factors, or a
/// reordering of the factors themselves.
class Unitary {
public:
    enum class Kind { Identity, Dense, IndexMap, FactorPermutation };
    using IndexFn = std::function<Index(Index)>;

    static Unitary identity(Dims dims);
    static Unitary dense(Dims dims, const Eigen::MatrixXcd& u, std::vector<std::size_t> factors);
    static Unitary whole(const Eigen::MatrixXcd& u);
    /// Permutation of the local basis of `factors`; `inverse` must undo `forward`.
    static Unitary index_map(Dims dims, std::vector<std::size_t> factors, IndexFn forward, IndexFn inverse,
                             std::string name = "index_map");
    /// Output factor p is input factor order[p].
    static Unitary factor_permutation(Dims dims, std::vector<std::size_t> order);

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    const Dims& input_dims() const { return dims_; }
    Dims output_dims() const;
    const std::vector<std::size_t>& factors() const { return factors_; }
    const Eigen::MatrixXcd& matrix() const { return matrix_; }
    Index local_dim() const;

    State apply(const State& psi) const;
    Unitary inverse() const;
    /// Given a context on the output space, the context U^-1 Z U on the input space.
    MeasurementContext conjugate(const MeasurementContext& ctx) const;
    /// Dense matrix of the local action (index maps only when small).
    Eigen::MatrixXcd local_matrix() const;

private:
    Kind kind_ = Kind::Identity;
    std::string name_;
    Dims dims_;
    std::vector<std::size_t> factors_;
    Eigen::MatrixXcd matrix_;
    IndexFn forward_;
    IndexFn inverse_;
};

/// Apply a dense operator to the listed factors of every entry of a single-block state.
std::vector<Entry> apply_local(const std::vector<Entry>& entries, const Dims& dims,
                               const std::vector<std::size_t>& factors, const Eigen::MatrixXcd& u);

}  // namespace crq::qcore
