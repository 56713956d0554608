#pragma once

#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "crq/error.hpp"

namespace crq::pipeline {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

enum class ApproxPolicy {
    /// Use exact rational squares when every c_i^2 is within 1e-12 of a fraction
    /// and the lcm of their smallest denominators is <= min(D, 2^20); otherwise CommonDenominator.
    PreferExact,
    /// Round every c_i^2 to a multiple of 1/D with D = ceil(4 l^2 / eps^2).
    CommonDenominator,
    /// The smallest common denominator D' <= D for which rounding meets |c'_i - c_i| < eps/l.
    SmallestDenominator,
};

std::string policy_name(ApproxPolicy p);
ApproxPolicy policy_from_name(const std::string& s);

/// c'_i = sqrt(p_i / q_i) with gcd(p_i, q_i) = 1, m_i = p_i prod_{i' != i} q_{i'}
/// and c'_i / sqrt(m_i) = 1 / sqrt(sum_m) for every i.
struct RationalApprox {
    std::vector<double> c;
    std::vector<Rational> c_prime_sq;
    std::vector<double> c_prime;
    std::vector<BigInt> m_list;
    BigInt sum_m;              // q = 1 / sqrt(sum_m)
    BigInt denominator;        // common denominator used for the search
    double epsilon = 0.0;
    ApproxPolicy policy = ApproxPolicy::PreferExact;

    double q() const;
    /// m_i / gcd(m): the same ratios with the smallest integers.
    std::vector<Index> reduced_m() const;
    /// The invariants checked in exact arithmetic (plus the float bound on |c'_i - c_i|).
    bool exact_sum_is_one() const;
    bool quotient_is_constant() const;
    bool within_bound() const;
};

/// Pre: all c_i > 0, sum c_i^2 = 1 within 1e-12, eps > 0.
/// Throws ApproxInfeasible when D exceeds the denominator cap or a component rounds to zero.
RationalApprox rational_approx(const std::vector<double>& c, double eps,
                               ApproxPolicy policy = ApproxPolicy::PreferExact);

/// Cap on the common denominator searched by rational_approx.
constexpr std::uint64_t kMaxDenominator = std::uint64_t{1} << 40;

nlohmann::ordered_json to_json(const RationalApprox& a);

}  // namespace crq::pipeline
