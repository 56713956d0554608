#pragma once

#include <vector>

#include "crq/hvmodel/certificate.hpp"
#include "crq/hvmodel/model.hpp"
#include "crq/qcore/unitary.hpp"

namespace crq::hvmodel {

using qcore::Unitary;

constexpr double kDefaultTol = 1e-9;

/// Compare P_a(ctx_a | lambda) with P_b(ctx_b | lambda) almost everywhere.
///
/// Labels in both supports are compared pointwise. The labels only in
/// supp mu_a are compared with every label only in supp mu_b; when one of
/// these exclusive parts is empty the other part is left unconstrained.
Certificate compare_on_supports(const std::string& name, const HiddenVariableModel& model, const State& a,
                                const MeasurementContext& ctx_a, const State& b, const MeasurementContext& ctx_b,
                                double bound);

/// Averaging the tables over mu_psi reproduces the Born distribution.
Certificate check_cq(const HiddenVariableModel& model, const State& psi, const MeasurementContext& ctx,
                     double tol = kDefaultTol);

/// P_{U psi}(Z | lambda) = P_psi(U^-1 Z U | lambda); ctx lives on U's output space.
Certificate check_ui(const HiddenVariableModel& model, const State& psi, const Unitary& u,
                     const MeasurementContext& ctx, double tol = kDefaultTol);

/// Tables at psi and phi differ by at most k * sqrt(eps) + tol, eps = 1 - |<psi, phi>|.
Certificate check_cp(const HiddenVariableModel& model, const State& psi, const State& phi,
                     const MeasurementContext& ctx, double k, double tol = kDefaultTol);

/// The joint context must hold exactly one party-A and one party-B entry;
/// marginals of its rows must equal the single-party rows for every label.
Certificate check_pi(const HiddenVariableModel& model, const MeasurementContext& joint, double tol = kDefaultTol);

/// P_{psi1}(X | lambda) = P_{psi1 (x) psi2}(X (x) 1 | lambda).
Certificate check_pe(const HiddenVariableModel& model, const State& psi1, const State& psi2,
                     const MeasurementContext& ctx, double tol = kDefaultTol);

/// P_{sum c_i e_i}(X | lambda) = P_{sum c_i e_i (x) u_i}(X (x) 1 | lambda) for eigenstates e_i
/// of X, an orthonormal family u_i and coefficients c_i >= 0 with sum c_i^2 = 1.
Certificate check_se(const HiddenVariableModel& model, const MeasurementContext& ctx, const std::vector<State>& e,
                     const std::vector<double>& c, const std::vector<State>& u, double tol = kDefaultTol);

/// Local unitaries on one party leave the other party's tables unchanged.
/// U1 acts on party-A factors, U2 on party-B factors; ctx_x and ctx_y are
/// single-entry contexts on psi's factor dims.
Certificate check_lemma1(const HiddenVariableModel& model, const State& psi, const Unitary& u1, const Unitary& u2,
                         const MeasurementContext& ctx_x, const MeasurementContext& ctx_y, double tol = kDefaultTol);

/// sum_i c_i e_i (x) u_i as a sparse state (zero coefficients skipped).
State schmidt_sum(const std::vector<State>& e, const std::vector<double>& c, const std::vector<State>& u);
State linear_sum(const std::vector<State>& e, const std::vector<double>& c);

}  // namespace crq::hvmodel
