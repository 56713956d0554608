#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "crq/embezzle/embezzle.hpp"
#include "support/oracles.hpp"

using namespace crq;
using namespace crq::embezzle;
using qcore::ravel;

namespace {

// frozen from the harmonic-ratio oracle and the brute-force inner product
constexpr double kFidelity212 = 0.837975319575053;
constexpr double kFidelity312 = 0.869243633656497;

Dims hpp_hp(const EmbezzleConfig& c) { return {c.n, c.m}; }

}  // namespace

TEST(Config, Make) {
    auto c = EmbezzleConfig::make(2, 1, 2);
    EXPECT_EQ(c.n, 4u);
    EXPECT_EQ(EmbezzleConfig::make(3, 3, 1).n, 729u);
    EXPECT_THROW(EmbezzleConfig::make(2, 1, 3), Error);
    EXPECT_THROW(EmbezzleConfig::make(2, 1, 0), Error);
    EXPECT_THROW(EmbezzleConfig::make(2, 40, 1), Error);
}

TEST(Catalyst, TwoLevelAmplitudes) {
    auto k = catalyst(2);
    EXPECT_EQ(k.dims(), (Dims{2, 2}));
    EXPECT_NEAR(std::real(k.amplitude(0)), std::sqrt(2.0 / 3.0), 1e-15);
    EXPECT_NEAR(std::real(k.amplitude(3)), std::sqrt(1.0 / 3.0), 1e-15);
    EXPECT_EQ(k.nonzeros(), 2u);
}

TEST(Catalyst, NormalizedForManySizes) {
    for (Index n : {1u, 5u, 64u, 729u}) EXPECT_NEAR(catalyst(n).norm(), 1.0, 1e-12);
    EXPECT_NEAR(harmonic(4), 25.0 / 12.0, 1e-15);
}

TEST(Perm, BijectionExhaustive) {
    for (Index m : {1u, 2u, 3u})
        for (int ne : {1, 2, 3})
            for (Index mi = 1; mi <= m; ++mi)
                for (auto order : {CompletionOrder::Lexicographic, CompletionOrder::ReverseLexicographic}) {
                    auto c = EmbezzleConfig::make(m, ne, mi);
                    std::set<std::pair<Index, Index>> seen;
                    for (Index k = 1; k <= c.n; ++k)
                        for (Index j = 1; j <= m; ++j) {
                            auto p = embezzle_perm(c, k, j, order);
                            ASSERT_GE(p.k, 1u);
                            ASSERT_LE(p.k, c.n);
                            ASSERT_GE(p.j, 1u);
                            ASSERT_LE(p.j, m);
                            seen.insert({p.k, p.j});
                            auto back = embezzle_perm_inverse(c, p.k, p.j, order);
                            ASSERT_EQ(back.k, k);
                            ASSERT_EQ(back.j, j);
                        }
                    EXPECT_EQ(seen.size(), c.n * m);
                }
}

TEST(Perm, FirstColumnLandsOnTargetRows) {
    // position p = k in the first list maps to (s, j) with k = (s - 1) m_i + j
    auto c = EmbezzleConfig::make(3, 1, 2);
    for (Index k = 1; k <= c.n; ++k) {
        auto p = embezzle_perm(c, k, 1);
        EXPECT_EQ((p.k - 1) * 2 + p.j, k);
    }
}

TEST(Perm, OutOfRange) {
    auto c = EmbezzleConfig::make(2, 1, 2);
    try {
        embezzle_perm(c, 0, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IndexOutOfRange);
    }
    EXPECT_THROW(embezzle_perm(c, 5, 1), Error);
    EXPECT_THROW(embezzle_perm_inverse(c, 1, 3), Error);
}

TEST(Embezzler, RankOneIsIdentityOnCatalyst) {
    auto c = EmbezzleConfig::make(2, 2, 1);
    auto psi = catalyst(c.n).tensor(State::basis({c.m}, 0)).permute_factors({0, 2, 1});
    // psi lives on H''_A (x) H'_A (x) H''_B; apply U^(1) on (H''_A, H'_A)
    auto out = apply_embezzler(c, psi, 0, 1);
    EXPECT_NEAR(std::abs(qcore::inner(out, psi)), 1.0, 1e-12);
}

TEST(Embezzler, PreservesNorm) {
    for (Index mi : {1u, 2u, 3u}) {
        auto c = EmbezzleConfig::make(3, 1, mi);
        auto psi = catalyst(c.n).tensor(State::basis({c.m}, 0));
        auto out = apply_embezzler(c, psi, 0, 2);
        EXPECT_NEAR(out.norm(), 1.0, 1e-13);
        EXPECT_EQ(out.nonzeros(), psi.nonzeros());
    }
}

TEST(Embezzler, FactorMismatch) {
    auto c = EmbezzleConfig::make(2, 1, 2);
    try {
        embezzler({3, 2}, 0, 1, c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::FactorMismatch);
    }
    EXPECT_NO_THROW(embezzler(hpp_hp(c), 0, 1, c));
}

TEST(Embezzler, InverseUndoes) {
    auto c = EmbezzleConfig::make(2, 1, 2);
    auto u = embezzler(hpp_hp(c), 0, 1, c, CompletionOrder::ReverseLexicographic);
    for (Index x = 0; x < c.n * c.m; ++x) {
        auto s = State::basis(hpp_hp(c), x);
        auto back = u.inverse().apply(u.apply(s));
        EXPECT_EQ(back.entries()[0].index, x);
    }
}

TEST(MaxEntangled, Amplitudes) {
    auto phi = max_entangled(3, 2);
    EXPECT_EQ(phi.dims(), (Dims{3, 3}));
    EXPECT_NEAR(std::real(phi.amplitude(0)), std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(std::real(phi.amplitude(4)), std::sqrt(0.5), 1e-15);
    EXPECT_EQ(phi.nonzeros(), 2u);
}

TEST(Fidelity, RankOneIsExactlyOne) {
    for (Index m : {1u, 2u, 3u}) EXPECT_NEAR(embezzlement_fidelity(EmbezzleConfig::make(m, 1, 1)), 1.0, 1e-14);
}

TEST(Fidelity, FrozenValues) {
    EXPECT_NEAR(embezzlement_fidelity(EmbezzleConfig::make(2, 1, 2)), kFidelity212, 1e-12);
    EXPECT_NEAR(embezzlement_fidelity(EmbezzleConfig::make(3, 1, 2)), kFidelity312, 1e-12);
}

TEST(Fidelity, MatchesOracle) {
    for (Index m : {2u, 3u})
        for (int ne : {1, 2})
            for (Index mi = 1; mi <= m; ++mi)
                EXPECT_NEAR(embezzlement_fidelity(EmbezzleConfig::make(m, ne, mi)), crq::testing::embezzle_oracle(m, ne, mi),
                            1e-12);
}

TEST(Fidelity, OracleMatchesBruteForce) {
    for (auto [m, ne] : std::vector<std::pair<Index, int>>{{2, 1}, {2, 2}, {3, 1}})
        for (Index mi = 1; mi <= m; ++mi)
            EXPECT_NEAR(crq::testing::embezzle_oracle(m, ne, mi), crq::testing::embezzle_brute_force(m, ne, mi), 1e-12);
}

TEST(Fidelity, AboveBound) {
    for (Index m : {2u, 3u})
        for (int ne : {1, 2, 3})
            for (Index mi = 1; mi <= m; ++mi)
                EXPECT_GE(embezzlement_fidelity(EmbezzleConfig::make(m, ne, mi)), 1.0 - 1.0 / (2.0 * ne));
}

TEST(Fidelity, NondecreasingInN) {
    for (Index m : {2u, 3u})
        for (Index mi = 1; mi <= m; ++mi) {
            double prev = 0.0;
            for (int ne = 1; ne <= 4; ++ne) {
                double f = embezzlement_fidelity(EmbezzleConfig::make(m, ne, mi));
                EXPECT_GE(f, prev - 1e-14);
                prev = f;
            }
        }
}

TEST(Fidelity, IndependentOfCompletionOrder) {
    for (Index mi : {1u, 2u}) {
        auto c = EmbezzleConfig::make(3, 1, mi);
        EXPECT_NEAR(embezzlement_fidelity(c, CompletionOrder::Lexicographic),
                    embezzlement_fidelity(c, CompletionOrder::ReverseLexicographic), 1e-14);
    }
}

TEST(BlockUnitary, ActsPerComponent) {
    // dims (H'', H, H') = (4, 2, 2); component 0 gets m_0 = 1, component 1 gets m_1 = 2
    std::vector<EmbezzleConfig> cfgs{EmbezzleConfig::make(2, 1, 1), EmbezzleConfig::make(2, 1, 2)};
    Dims dims{4, 2, 2};
    auto u = block_unitary(dims, 0, 1, 2, cfgs);
    for (Index k = 0; k < 4; ++k) {
        Index x = ravel({k, 1, 0}, dims);
        auto out = u.apply(State::basis(dims, x));
        auto p = embezzle_perm(cfgs[1], k + 1, 1);
        EXPECT_EQ(out.entries()[0].index, ravel({p.k - 1, 1, p.j - 1}, dims));
        auto same = u.apply(State::basis(dims, ravel({k, 0, 0}, dims)));
        EXPECT_EQ(same.entries()[0].index, ravel({k, 0, 0}, dims));
    }
}

TEST(BlockUnitary, BadProjectors) {
    std::vector<EmbezzleConfig> cfgs{EmbezzleConfig::make(2, 1, 1), EmbezzleConfig::make(2, 1, 2)};
    Dims dims{4, 2, 2};
    Eigen::MatrixXcd p0 = Eigen::MatrixXcd::Zero(2, 2), p1 = Eigen::MatrixXcd::Zero(2, 2);
    p0(0, 0) = 1.0;
    p1(1, 1) = 1.0;
    EXPECT_NO_THROW(block_unitary(dims, 0, 1, 2, cfgs, {p0, p1}));
    auto expect_bad = [&](const std::vector<Eigen::MatrixXcd>& ps) {
        try {
            block_unitary(dims, 0, 1, 2, cfgs, ps);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::BadProjectors);
        }
    };
    expect_bad({p0, p0});
    expect_bad({p0});
    expect_bad({p0, Eigen::MatrixXcd::Identity(2, 2)});
    Eigen::MatrixXcd plus = Eigen::MatrixXcd::Constant(2, 2, 0.5);
    expect_bad({p0, plus});
}
