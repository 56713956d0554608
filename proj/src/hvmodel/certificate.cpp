#include "crq/hvmodel/certificate.hpp"

#include <cmath>
#include <sstream>

namespace crq::hvmodel {

Certificate Certificate::make(std::string name, double worst, double bound, std::optional<Witness> w) {
    Certificate c;
    c.check_name = std::move(name);
    c.worst_deviation = worst;
    c.bound = bound;
    c.passed = std::isfinite(worst) && worst <= bound;
    c.witness = std::move(w);
    return c;
}

Certificate Certificate::all_of(std::string name, std::vector<Certificate> parts) {
    Certificate c;
    c.check_name = std::move(name);
    c.passed = true;
    double best_margin = INFINITY;
    for (const auto& p : parts) {
        double margin = p.bound - p.worst_deviation;
        if (!p.passed && c.passed) {
            c.passed = false;
            c.worst_deviation = p.worst_deviation;
            c.bound = p.bound;
            c.witness = p.witness;
        } else if (c.passed && margin < best_margin) {
            best_margin = margin;
            c.worst_deviation = p.worst_deviation;
            c.bound = p.bound;
        }
    }
    c.details = std::move(parts);
    return c;
}

const Certificate* Certificate::first_failure() const {
    if (passed) return nullptr;
    for (const auto& d : details)
        if (auto f = d.first_failure()) return f;
    return this;
}

nlohmann::ordered_json to_json(const Certificate& c) {
    nlohmann::ordered_json j;
    j["check_name"] = c.check_name;
    j["passed"] = c.passed;
    j["worst_deviation"] = c.worst_deviation;
    j["bound"] = c.bound;
    if (c.witness) {
        nlohmann::ordered_json w;
        w["label"] = c.witness->label;
        if (!c.witness->partner.empty()) w["partner"] = c.witness->partner;
        w["outcome"] = c.witness->outcome;
        w["description"] = c.witness->description;
        j["witness"] = w;
    }
    if (!c.details.empty()) {
        auto d = nlohmann::ordered_json::array();
        for (const auto& x : c.details) d.push_back(to_json(x));
        j["details"] = d;
    }
    return j;
}

void DeviationTracker::observe(double deviation, const std::string& label, const std::string& partner,
                               const std::string& outcome) {
    if (!seen_ || deviation > worst_ || std::isnan(deviation)) {
        seen_ = true;
        worst_ = std::isnan(deviation) ? INFINITY : deviation;
        at_ = Witness{label, partner, outcome, ""};
    }
}

std::optional<Witness> DeviationTracker::witness(const std::string& description) const {
    if (!seen_) return std::nullopt;
    Witness w = at_;
    w.description = description;
    return w;
}

AxiomViolation::AxiomViolation(std::string link, Certificate cert)
    : Error(ErrorKind::AxiomViolation,
            "link '" + link + "' failed (" + cert.check_name + ": deviation " + std::to_string(cert.worst_deviation) +
                " > bound " + std::to_string(cert.bound) +
                (cert.witness ? ", witness " + cert.witness->label : std::string()) + ")"),
      link_(std::move(link)),
      cert_(std::move(cert)) {}

std::string format_outcome(const std::vector<double>& values) {
    std::ostringstream os;
    os << "(";
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k) os << ",";
        double r = std::round(values[k]);
        if (std::abs(values[k] - r) < 1e-9)
            os << static_cast<long long>(r);
        else
            os << values[k];
    }
    os << ")";
    return os.str();
}

}  // namespace crq::hvmodel
