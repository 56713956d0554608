#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "crq/qcore/state.hpp"
#include "crq/qcore/unitary.hpp"

namespace crq::embezzle {

using qcore::State;
using qcore::Unitary;

struct EmbezzleConfig {
    Index m = 1;   // dim H'
    int n_exp = 1; // N, with n = m^(2N)
    Index n = 1;   // dim H''
    Index mi = 1;  // target entanglement rank, 1 <= mi <= m

    /// Validates 1 <= mi <= m and computes n = m^(2N), rejecting overflow.
    static EmbezzleConfig make(Index m, int n_exp, Index mi);
};

/// Order of the pairs e''_k (x) e'_j with j > m_i at the end of the second list.
enum class CompletionOrder { Lexicographic, ReverseLexicographic };

/// C(n) = sum_{k=1}^n 1/k
double harmonic(Index n);

/// kappa_n = sum_k (k C(n))^{-1/2} e''_k (x) e''_k on C^n (x) C^n.
State catalyst(Index n);

/// The basis permutation U^(m_i) of H'' (x) H' with 1-based indices:
/// the first ordering of the pairs (all k for j = 1, then j = 2, ...) is
/// mapped onto the second (pairs with j <= m_i row by row, then the rest).
struct IndexPair {
    Index k;
    Index j;
};
IndexPair embezzle_perm(const EmbezzleConfig& cfg, Index k, Index j,
                        CompletionOrder order = CompletionOrder::Lexicographic);
IndexPair embezzle_perm_inverse(const EmbezzleConfig& cfg, Index k, Index j,
                                CompletionOrder order = CompletionOrder::Lexicographic);

/// U^(m_i) on the factors (f_hpp, f_hp) of a state with the given dims,
/// which must have sizes (n, m).
Unitary embezzler(const Dims& dims, std::size_t f_hpp, std::size_t f_hp, const EmbezzleConfig& cfg,
                  CompletionOrder order = CompletionOrder::Lexicographic);
State apply_embezzler(const EmbezzleConfig& cfg, const State& psi, std::size_t f_hpp, std::size_t f_hp,
                      CompletionOrder order = CompletionOrder::Lexicographic);

/// U = sum_i U^(m_i) (x) P_i on the factors (f_hpp, f_h, f_hp). Each projector
/// must be a diagonal rank-one projector |e_i><e_i| of H, pairwise distinct.
Unitary block_unitary(const Dims& dims, std::size_t f_hpp, std::size_t f_h, std::size_t f_hp,
                      const std::vector<EmbezzleConfig>& cfgs, const std::vector<Eigen::MatrixXcd>& projectors,
                      CompletionOrder order = CompletionOrder::Lexicographic);
/// Same with P_i = |e_i><e_i| in the standard basis.
Unitary block_unitary(const Dims& dims, std::size_t f_hpp, std::size_t f_h, std::size_t f_hp,
                      const std::vector<EmbezzleConfig>& cfgs,
                      CompletionOrder order = CompletionOrder::Lexicographic);

/// (1/sqrt(m_i)) sum_{j <= m_i} e'_j (x) e'_j on C^m (x) C^m.
State max_entangled(Index m, Index mi);

/// |<kappa_n (x) phi, (U_A (x) U_B)(kappa_n (x) e'_1 (x) e'_1)>| from sparse states.
double embezzlement_fidelity(const EmbezzleConfig& cfg, CompletionOrder order = CompletionOrder::Lexicographic);

}  // namespace crq::embezzle
