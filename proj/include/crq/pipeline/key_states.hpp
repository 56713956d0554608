#pragma once

#include <cstdint>
#include <vector>

#include "crq/embezzle/embezzle.hpp"
#include "crq/pipeline/rational.hpp"
#include "crq/qcore/state.hpp"
#include "crq/qcore/unitary.hpp"

namespace crq::pipeline {

using qcore::State;
using qcore::Unitary;

/// Canonical factor order H''_A, H''_B, H_A, H'_A, H_B, H'_B.
enum Factor : std::size_t { kAfar = 0, kBfar = 1, kA = 2, kAprime = 3, kB = 4, kBprime = 5 };

/// Default sparse-state budget: CRQ_MAX_NONZEROS or 10^7.
std::uint64_t default_max_nonzeros();

struct KeyStates {
    std::vector<double> c;                // coefficients in the eigenbasis, c_i >= 0
    std::vector<std::size_t> support;     // indices with c_i > 0
    std::vector<Index> m_list;            // m_i (reduced) on the support, 1 elsewhere
    Index m = 1;
    Index n = 1;
    int n_exp = 1;
    double q = 1.0;
    Dims dims;                            // [n, n, l, m, l, m]
    std::vector<embezzle::EmbezzleConfig> cfgs;
    Unitary u_a;                          // on factors (0, 2, 3)
    Unitary u_b;                          // on factors (1, 4, 5)
    State psi_ab;                         // sum_i c_i e_i (x) e_i
    State k1, k2, k3, k4;
    State target;                         // q kappa_n (x) sum_{i, j <= m_i} xi^{ij}_{AA'} (x) xi^{ij}_{BB'}
    double key4_overlap = 0.0;            // |<target, k4>|
};

/// Index of xi^{ij} = e_i (x) e'_j in H (x) H'.
inline Index xi_index(std::size_t i, Index j, Index m) { return static_cast<Index>(i) * m + j; }

/// Build psi''' and the four key states. `approx` covers the positive
/// entries of c in order. m_ambient = 0 uses m = max m_i.
/// Throws DimensionBudgetExceeded when a state would exceed max_nonzeros entries.
KeyStates build_key_states(const std::vector<double>& c, const RationalApprox& approx, int n_exp,
                           Index m_ambient = 0, std::uint64_t max_nonzeros = default_max_nonzeros());

/// Nonzeros of the largest key state for these parameters.
std::uint64_t key_state_size(Index m, int n_exp, std::uint64_t sum_m, std::size_t l);

}  // namespace crq::pipeline
