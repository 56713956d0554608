#include "crq/pipeline/rational.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace crq::pipeline {

namespace {

using boost::multiprecision::denominator;
using boost::multiprecision::numerator;

std::string to_str(const BigInt& v) { return v.str(); }
std::string to_str(const Rational& r) { return numerator(r).str() + "/" + denominator(r).str(); }

// Rounded numerators over d with the last one taking up the remainder.
std::vector<std::int64_t> round_over(const std::vector<double>& c, std::int64_t d) {
    std::vector<std::int64_t> a(c.size());
    std::int64_t used = 0;
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        a[i] = std::llround(static_cast<long double>(c[i]) * c[i] * d);
        used += a[i];
    }
    a.back() = d - used;
    return a;
}

bool meets_bound(const std::vector<double>& c, const std::vector<std::int64_t>& a, std::int64_t d, double eps) {
    const long double l = static_cast<long double>(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (a[i] <= 0) return false;
        long double cp = std::sqrt(static_cast<long double>(a[i]) / d);
        if (!(std::fabs(cp - c[i]) < eps / l)) return false;
    }
    return true;
}

bool is_exact(const std::vector<double>& c, const std::vector<std::int64_t>& a, std::int64_t d) {
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (a[i] <= 0) return false;
        long double r = static_cast<long double>(a[i]) / d;
        if (std::fabs(r - static_cast<long double>(c[i]) * c[i]) > 1e-12L) return false;
    }
    return true;
}

RationalApprox finish(const std::vector<double>& c, const std::vector<std::int64_t>& a, std::int64_t d, double eps,
                      ApproxPolicy policy) {
    RationalApprox r;
    r.c = c;
    r.epsilon = eps;
    r.policy = policy;
    r.denominator = d;
    for (auto ai : a) {
        Rational v{BigInt(ai), BigInt(d)};
        r.c_prime_sq.push_back(v);
        r.c_prime.push_back(std::sqrt(static_cast<double>(ai) / static_cast<double>(d)));
    }
    const std::size_t l = c.size();
    for (std::size_t i = 0; i < l; ++i) {
        BigInt m = numerator(r.c_prime_sq[i]);
        for (std::size_t k = 0; k < l; ++k)
            if (k != i) m *= denominator(r.c_prime_sq[k]);
        r.m_list.push_back(m);
        r.sum_m += m;
    }
    return r;
}

// Smallest q <= cap such that some p/q lies within tol of x, or 0 when none does.
std::int64_t simplest_denominator(long double x, long double tol, std::int64_t cap) {
    long double lo = x - tol, hi = x + tol;
    // continued-fraction walk down the Stern-Brocot tree of [lo, hi]
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    for (int depth = 0; depth < 64; ++depth) {
        long double a = std::ceil(lo);
        if (a <= hi) {
            std::int64_t ai = static_cast<std::int64_t>(a);
            std::int64_t q = ai * q1 + q0;
            return q <= cap ? q : 0;
        }
        long double fl = std::floor(lo);
        std::int64_t fi = static_cast<std::int64_t>(fl);
        std::int64_t p2 = fi * p1 + p0, q2 = fi * q1 + q0;
        if (q2 > cap) return 0;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        long double nlo = 1.0L / (hi - fl), nhi = 1.0L / (lo - fl);
        lo = nlo;
        hi = nhi;
    }
    return 0;
}

}  // namespace

std::string policy_name(ApproxPolicy p) {
    switch (p) {
        case ApproxPolicy::PreferExact: return "prefer-exact";
        case ApproxPolicy::CommonDenominator: return "common-denominator";
        case ApproxPolicy::SmallestDenominator: return "smallest-denominator";
    }
    return "?";
}

ApproxPolicy policy_from_name(const std::string& s) {
    if (s == "prefer-exact") return ApproxPolicy::PreferExact;
    if (s == "common-denominator") return ApproxPolicy::CommonDenominator;
    if (s == "smallest-denominator") return ApproxPolicy::SmallestDenominator;
    throw Error(ErrorKind::InvalidArgument, "unknown approximation policy '" + s + "'");
}

double RationalApprox::q() const { return 1.0 / std::sqrt(sum_m.convert_to<double>()); }

std::vector<Index> RationalApprox::reduced_m() const {
    BigInt g = 0;
    for (const auto& m : m_list) g = boost::multiprecision::gcd(g, m);
    std::vector<Index> out;
    for (const auto& m : m_list) {
        BigInt v = m / g;
        if (v > BigInt(std::numeric_limits<Index>::max() / 4))
            throw Error(ErrorKind::DimensionBudgetExceeded, "reduced m_i does not fit in 62 bits");
        out.push_back(v.convert_to<Index>());
    }
    return out;
}

bool RationalApprox::exact_sum_is_one() const {
    Rational s = 0;
    for (const auto& v : c_prime_sq) s += v;
    return s == 1;
}

bool RationalApprox::quotient_is_constant() const {
    // (c'_i)^2 / m_i == 1 / sum_m for every i
    const Rational q2(BigInt(1), sum_m);
    for (std::size_t i = 0; i < m_list.size(); ++i)
        if (c_prime_sq[i] / Rational(m_list[i]) != q2) return false;
    return true;
}

bool RationalApprox::within_bound() const {
    const double l = static_cast<double>(c.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        if (!(std::fabs(c_prime[i] - c[i]) < epsilon / l)) return false;
    return true;
}

RationalApprox rational_approx(const std::vector<double>& c, double eps, ApproxPolicy policy) {
    if (c.empty()) throw Error(ErrorKind::InvalidArgument, "no coefficients");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
    double s = 0.0;
    for (double v : c) {
        if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "coefficients must be positive");
        s += v * v;
    }
    if (std::fabs(s - 1.0) > 1e-12) throw Error(ErrorKind::NotNormalized, "sum of squared coefficients is not 1");

    const long double l = static_cast<long double>(c.size());
    const long double dmax_f = std::ceil(4.0L * l * l / (static_cast<long double>(eps) * eps));
    if (dmax_f > static_cast<long double>(kMaxDenominator))
        throw Error(ErrorKind::ApproxInfeasible, "epsilon too small for the denominator cap");
    const auto dmax = static_cast<std::int64_t>(dmax_f);

    if (policy == ApproxPolicy::PreferExact) {
        const std::int64_t scan = std::min<std::int64_t>(dmax, 1 << 20);
        std::int64_t d = 1;
        for (double v : c) {
            auto q = simplest_denominator(static_cast<long double>(v) * v, 1e-12L, scan);
            if (q == 0) {
                d = 0;
                break;
            }
            d = std::lcm(d, q);
            if (d > scan) {
                d = 0;
                break;
            }
        }
        if (d > 0) {
            auto a = round_over(c, d);
            if (is_exact(c, a, d) && meets_bound(c, a, d, eps)) return finish(c, a, d, eps, policy);
        }
    }
    if (policy == ApproxPolicy::SmallestDenominator) {
        for (std::int64_t d = 1; d <= dmax; ++d) {
            auto a = round_over(c, d);
            if (meets_bound(c, a, d, eps)) return finish(c, a, d, eps, policy);
        }
        throw Error(ErrorKind::ApproxInfeasible, "no denominator up to the cap meets the bound");
    }
    auto a = round_over(c, dmax);
    if (!meets_bound(c, a, dmax, eps))
        throw Error(ErrorKind::ApproxInfeasible, "a coefficient rounds to zero over the common denominator");
    return finish(c, a, dmax, eps, policy);
}

nlohmann::ordered_json to_json(const RationalApprox& a) {
    nlohmann::ordered_json j;
    j["c"] = a.c;
    j["epsilon"] = a.epsilon;
    j["policy"] = policy_name(a.policy);
    j["denominator"] = to_str(a.denominator);
    auto sq = nlohmann::ordered_json::array();
    for (const auto& v : a.c_prime_sq) sq.push_back(to_str(v));
    j["c_prime_squared"] = sq;
    j["c_prime"] = a.c_prime;
    auto ms = nlohmann::ordered_json::array();
    for (const auto& v : a.m_list) ms.push_back(to_str(v));
    j["m"] = ms;
    BigInt root = boost::multiprecision::sqrt(a.sum_m);
    j["q"] = root * root == a.sum_m ? "1/" + to_str(root) : "1/sqrt(" + to_str(a.sum_m) + ")";
    j["q_numeric"] = a.q();
    j["sum_is_one"] = a.exact_sum_is_one();
    j["quotient_constant"] = a.quotient_is_constant();
    return j;
}

}  // namespace crq::pipeline
