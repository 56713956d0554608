#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crq/error.hpp"

namespace crq::hvmodel {

struct Witness {
    std::string label;
    std::string partner;      // second hidden-variable value, for two-state comparisons
    std::string outcome;      // outcome tuple, e.g. "(1,-1)"
    std::string description;
};

/// Result of a check: passed iff worst_deviation <= bound.
struct Certificate {
    std::string check_name;
    bool passed = true;
    double worst_deviation = 0.0;
    double bound = 0.0;
    std::optional<Witness> witness;
    std::vector<Certificate> details;

    static Certificate make(std::string name, double worst, double bound, std::optional<Witness> w = std::nullopt);
    /// Conjunction of sub-certificates; worst/bound taken from the failing (or tightest) one.
    static Certificate all_of(std::string name, std::vector<Certificate> parts);
    /// First failing certificate in depth-first order, or nullptr.
    const Certificate* first_failure() const;
};

nlohmann::ordered_json to_json(const Certificate& c);

/// Tracks the largest deviation seen and where it occurred.
class DeviationTracker {
public:
    void observe(double deviation, const std::string& label, const std::string& partner, const std::string& outcome);
    double worst() const { return worst_; }
    std::optional<Witness> witness(const std::string& description) const;

private:
    double worst_ = 0.0;
    bool seen_ = false;
    Witness at_;
};

/// Raised by a derivation when one of its links fails.
class AxiomViolation : public Error {
public:
    AxiomViolation(std::string link, Certificate cert);
    const std::string& link() const { return link_; }
    const Certificate& certificate() const { return cert_; }

private:
    std::string link_;
    Certificate cert_;
};

std::string format_outcome(const std::vector<double>& values);

}  // namespace crq::hvmodel
