#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "crq/hvmodel/certificate.hpp"
#include "crq/hvmodel/model.hpp"
#include "crq/qcore/observable.hpp"

namespace crq::chainbell {

using hvmodel::Certificate;
using hvmodel::HiddenVariableModel;
using hvmodel::Label;
using qcore::MeasurementContext;
using qcore::Observable;
using qcore::State;

/// |theta> = sin(theta/2) e_1 + cos(theta/2) e_2
State theta_state(double theta);
double theta_k(int k, int n);
/// Z_k = [theta_k + pi] - [theta_k] with theta_k = k pi / 2N; Z_{2N} = -Z_0.
Observable z_operator(int k, int n);
/// sum_i c_i e_i (x) e_i on C^l (x) C^l; c_i >= 0, sum c_i^2 = 1.
State bell_state(const std::vector<double>& c);

/// One term of I^(N): P(X_a = Y_b) when `equal`, else P(X_a != Y_b).
struct ChainTerm {
    int a;
    int b;
    bool equal;
};
std::vector<ChainTerm> chain_terms(int n);

/// Joint context {X_a on factor 0 (party A), Y_b on factor 1 (party B)}.
MeasurementContext chain_context(const Observable& x, const Observable& y);
MeasurementContext single_context(const Observable& x, std::size_t factor);

/// I^(N) on the Bell state, by summing 2N Born probabilities.
double chained_bell_quantum(int n);
/// 2N sin^2(pi / 4N)
double chained_bell_closed_form(int n);
/// I^(N)(lambda) from the model's joint tables.
double chained_bell_hv(const HiddenVariableModel& model, int n, const Label& label);

struct LambdaReport {
    Label label;
    double weight = 0.0;
    double p_plus = 0.0;                // P(X_0 = 1 | lambda)
    double p_minus = 0.0;               // P(X_0 = -1 | lambda)
    double chain_value = 0.0;           // I^(N)(lambda), conditioned in step 2
    double difference = 0.0;            // |P(X_0=1|l) - P(X_0=-1|l)|, conditioned in step 2
    double event_probability = 1.0;     // P(|x| = |y| = 1 | lambda), step 2 only
    bool degenerate = false;
    bool passed = true;
};

struct ChainCertificate {
    Certificate certificate;
    int n = 0;
    double quantum_value = 0.0;         // I^(N) on the Bell state
    double max_half_deviation = 0.0;    // max over lambda of |P(X_0 = +-1 | lambda) - 1/2|
    double half_bound = 0.0;            // quantum_value / 2
    std::vector<LambdaReport> per_lambda;

    bool passed() const { return certificate.passed; }
};

nlohmann::ordered_json to_json(const ChainCertificate& c);

/// Step 1: on the Bell state of C^2 (x) C^2, check PI on every chain context
/// (AxiomViolation on failure), then |P(X_0=1|l) - P(X_0=-1|l)| <= I^(N)(l)
/// per lambda and the mu-integral of the left side against I^(N) of the Bell state.
ChainCertificate step1_certificate(const HiddenVariableModel& model, int n, double tol = 1e-9);

/// X_k for step 2: Z_k on span(e_a, e_b) and `base` eigenvalues elsewhere.
Observable pair_observable(int k, int n, std::size_t l, std::pair<std::size_t, std::size_t> pair,
                           const std::vector<double>& base);
/// Default base eigenvalues: +1 on a, -1 on b, 2 + i on every other index i.
std::vector<double> default_base(std::size_t l, std::pair<std::size_t, std::size_t> pair);

/// Step 2: the step-1 chain on tables conditioned on |x| = |y| = 1, for the
/// state sum c_i e_i (x) e_i with c_a = c_b. Rows with a null event are
/// skipped as degenerate.
ChainCertificate step2_certificate(const HiddenVariableModel& model, const std::vector<double>& c,
                                   std::pair<std::size_t, std::size_t> pair, int n, double tol = 1e-9,
                                   std::optional<std::vector<double>> base = std::nullopt);

}  // namespace crq::chainbell
