#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "crq/error.hpp"

namespace crq::qcore {

/// Hermitian operator with a cached spectral decomposition.
///
/// Eigenvalues closer than 1e-9 are merged into one outcome. The matrix is
/// split into independent blocks (connected components of its nonzero
/// pattern) before diagonalization, so diagonal and block-diagonal operators
/// on large spaces stay cheap.
class Observable {
public:
    struct Block {
        std::vector<Index> indices;        // basis indices spanned by the block
        Eigen::MatrixXcd vectors;          // columns are eigenvectors in those coordinates
        std::vector<std::size_t> labels;   // outcome index of each column
    };

    Observable() = default;
    explicit Observable(const Eigen::MatrixXcd& matrix);
    static Observable diagonal(const std::vector<double>& values);

    Index dim() const { return static_cast<Index>(matrix_.rows()); }
    const Eigen::MatrixXcd& matrix() const { return matrix_; }
    /// Distinct eigenvalues in ascending order.
    const std::vector<double>& eigenvalues() const { return eigenvalues_; }
    std::size_t outcome_count() const { return eigenvalues_.size(); }
    std::optional<std::size_t> eigen_index(double value) const;
    std::size_t multiplicity(std::size_t k) const;

    const std::vector<Block>& blocks() const { return blocks_; }
    Eigen::MatrixXcd projector(std::size_t k) const;
    /// Full eigenvector matrix, columns sorted by outcome index.
    Eigen::MatrixXcd eigenvectors(std::vector<std::size_t>* labels = nullptr) const;

    bool is_diagonal() const { return diagonal_; }
    bool same_as(const Observable& other, double tol = 1e-12) const;

private:
    Eigen::MatrixXcd matrix_;
    std::vector<double> eigenvalues_;
    std::vector<Block> blocks_;
    bool diagonal_ = true;
};

/// Embed an operator acting on `from` (factor list, any order) into the
/// local space of `into` (sorted factor list containing `from`).
Eigen::MatrixXcd embed_operator(const Eigen::MatrixXcd& op, const std::vector<std::size_t>& from,
                                const std::vector<std::size_t>& into, const Dims& dims);

double max_abs(const Eigen::MatrixXcd& m);

}  // namespace crq::qcore
