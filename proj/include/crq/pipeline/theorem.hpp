#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crq/chainbell/chainbell.hpp"
#include "crq/hvmodel/certificate.hpp"
#include "crq/hvmodel/model.hpp"
#include "crq/pipeline/key_states.hpp"
#include "crq/pipeline/rational.hpp"
#include "crq/qcore/observable.hpp"

namespace crq::pipeline {

using hvmodel::Certificate;
using hvmodel::HiddenVariableModel;
using hvmodel::Label;
using qcore::Observable;

struct TheoremOptions {
    double epsilon = 0.1;
    int chain_n = 4;                      // N of the chained Bell inequality used in (q1)
    double tol = 1e-9;
    double k_total = 8.0 * std::sqrt(2.0);
    double k_cp = std::sqrt(2.0);
    std::uint64_t max_nonzeros = default_max_nonzeros();
    int max_embezzle_exp = 16;
    ApproxPolicy policy = ApproxPolicy::SmallestDenominator;
};

struct LambdaRow {
    Label label;
    double weight = 0.0;
    std::vector<double> probability;      // P_psi(Z = z_i | lambda)
    std::vector<double> born;             // |c_i|^2 (summed over the eigenspace when degenerate)
    std::vector<double> approx;           // (c'_i)^2
    double deviation = 0.0;               // max_i |probability_i - born_i|
};

struct TheoremCertificate {
    Certificate certificate;              // links as details
    std::vector<double> eigenvalues;
    std::vector<LambdaRow> per_lambda;
    double epsilon = 0.0;
    int chain_n = 0;
    int embezzle_exp = 0;
    Index embezzle_n = 0;
    Index m = 0;
    std::vector<Index> m_list;
    double key4_overlap = 0.0;
    bool capped = false;                  // embezzlement fidelity limited by the nonzero budget
    double bound = 0.0;
    double max_deviation = 0.0;
    bool degenerate = false;
    bool passed = false;
};

nlohmann::ordered_json to_json(const TheoremCertificate& t);

/// Step 3 for a nondegenerate Z: every link of the (q) and (c) chains is
/// evaluated; the first failing link raises AxiomViolation naming it.
/// Otherwise the per-lambda values P_psi(Z = z_i | lambda) are compared with |c_i|^2.
TheoremCertificate step3_certificate(const HiddenVariableModel& model, const qcore::State& psi, const Observable& z,
                                     const TheoremOptions& opts = {});

/// Refine a degenerate Z to a nondegenerate one with the same eigenvectors,
/// run step 3 and sum the refined rows over each eigenspace.
TheoremCertificate degenerate_reduce(const HiddenVariableModel& model, const qcore::State& psi, const Observable& z,
                                     const TheoremOptions& opts = {});

/// Step 1 audit (AxiomViolation "step1" on failure), then degenerate_reduce.
TheoremCertificate theorem_verify(const HiddenVariableModel& model, const qcore::State& psi, const Observable& z,
                                  const TheoremOptions& opts = {});

/// Smallest embezzlement exponent whose predicted (key4) overlap reaches 1 - eps
/// within the budget; the flag reports when the budget stopped the search first.
std::pair<int, bool> choose_embezzle_exp(const std::vector<double>& c_support, const RationalApprox& approx,
                                         Index m, std::size_t l, double eps, std::uint64_t max_nonzeros,
                                         int max_exp);

}  // namespace crq::pipeline
