#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "crq/hvmodel/born_model.hpp"
#include "crq/hvmodel/checks.hpp"
#include "crq/hvmodel/conditioning.hpp"
#include "crq/hvmodel/tabular_model.hpp"
#include "crq/qcore/born.hpp"
#include "support/fixtures.hpp"
#include "support/random.hpp"

using namespace crq;
using namespace crq::hvmodel;
using qcore::ContextEntry;
using qcore::Observable;
using qcore::Party;
using crq::testing::Rng;

namespace {

State real_state(Dims dims, std::vector<double> amps) {
    std::vector<Complex> a(amps.begin(), amps.end());
    return State::from_dense(std::move(dims), a);
}

MeasurementContext z01() { return MeasurementContext::whole(Observable::diagonal({0.0, 1.0})); }

Eigen::MatrixXcd swap2() {
    Eigen::MatrixXcd m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Eigen::MatrixXcd hadamard() {
    Eigen::MatrixXcd m(2, 2);
    m << 1, 1, 1, -1;
    return m / std::sqrt(2.0);
}

// Reads every single observable as the diagonal matrix of its sorted eigenvalues,
// so conjugating the observable never changes the table.
class ConjugationIgnoringModel : public HiddenVariableModel {
public:
    std::string name() const override { return "conjugation-ignoring"; }
    std::vector<Label> labels() const override { return born_.labels(); }
    StateMeasure measure_of(const State& psi) const override { return born_.measure_of(psi); }
    std::vector<double> row(const MeasurementContext& ctx, const Label& label) const override {
        std::vector<ContextEntry> entries;
        for (const auto& e : ctx.entries()) {
            std::vector<double> ev;
            for (std::size_t k = 0; k < e.observable.outcome_count(); ++k)
                for (std::size_t r = 0; r < e.observable.multiplicity(k); ++r) ev.push_back(e.observable.eigenvalues()[k]);
            entries.push_back({Observable::diagonal(ev), e.factors, e.party});
        }
        return born_.row(MeasurementContext(ctx.dims(), entries), label);
    }

private:
    BornModel born_;
};

// Moves `shift` of the mass from outcome 0 to outcome 1 on contexts over more than one factor.
class ExtensionShiftModel : public HiddenVariableModel {
public:
    explicit ExtensionShiftModel(double shift) : shift_(shift) {}
    std::string name() const override { return "extension-shift"; }
    std::vector<Label> labels() const override { return born_.labels(); }
    StateMeasure measure_of(const State& psi) const override { return born_.measure_of(psi); }
    std::vector<double> row(const MeasurementContext& ctx, const Label& label) const override {
        auto r = born_.row(ctx, label);
        if (ctx.dims().size() > 1) {
            double t = std::min(shift_, r[0]);
            r[0] -= t;
            r[1] += t;
        }
        return r;
    }

private:
    double shift_;
    BornModel born_;
};

// Swaps the rows of outcomes 0 and 1 on contexts over more than one factor.
class ExtensionSwapModel : public HiddenVariableModel {
public:
    std::string name() const override { return "extension-swap"; }
    std::vector<Label> labels() const override { return born_.labels(); }
    StateMeasure measure_of(const State& psi) const override { return born_.measure_of(psi); }
    std::vector<double> row(const MeasurementContext& ctx, const Label& label) const override {
        auto r = born_.row(ctx, label);
        if (ctx.dims().size() > 1) std::swap(r[0], r[1]);
        return r;
    }

private:
    BornModel born_;
};

TabularModel two_point_model(double w0) {
    TabularModel m("two-point");
    m.add_label("l0");
    m.add_label("l1");
    m.add_measure(real_state({2}, {std::sqrt(0.3), std::sqrt(0.7)}), StateMeasure({{"l0", w0}, {"l1", 1.0 - w0}}));
    m.add_table(z01(), {{"l0", {1.0, 0.0}}, {"l1", {0.0, 1.0}}});
    return m;
}

}  // namespace

TEST(StateMeasure, Validation) {
    EXPECT_THROW(StateMeasure(std::vector<std::pair<Label, double>>{}), Error);
    EXPECT_THROW(StateMeasure({{"a", 0.5}, {"b", 0.4}}), Error);
    EXPECT_THROW(StateMeasure({{"a", 1.0}, {"b", 0.0}}), Error);
    EXPECT_THROW(StateMeasure({{"a", 0.5}, {"a", 0.5}}), Error);
    StateMeasure m({{"b", 0.25}, {"a", 0.75}});
    EXPECT_EQ(m.support(), (std::vector<Label>{"a", "b"}));
    EXPECT_DOUBLE_EQ(m.weight("b"), 0.25);
    EXPECT_EQ(m.weight("c"), 0.0);
}

TEST(ConditionalTable, RowValidation) {
    EXPECT_THROW(check_row({0.5, 0.6}, 2), Error);
    EXPECT_THROW(check_row({1.0}, 2), Error);
    EXPECT_THROW(check_row({1.2, -0.2}, 2), Error);
    EXPECT_NO_THROW(check_row({0.25, 0.75}, 2));
}

TEST(BornModel, PointMassAndRegistry) {
    BornModel m;
    auto e1 = State::basis({2}, 0);
    auto mu = m.measure_of(e1);
    ASSERT_EQ(mu.support().size(), 1u);
    EXPECT_DOUBLE_EQ(mu.weight(mu.support()[0]), 1.0);
    auto phased = State::from_dense({2}, {Complex{0.0, 1.0}, 0.0});
    EXPECT_EQ(m.measure_of(phased).support(), mu.support());
    EXPECT_NE(m.measure_of(State::basis({2}, 1)).support(), mu.support());
}

TEST(BornModel, UniformSuperpositionHalf) {
    BornModel m;
    auto psi = real_state({2}, {std::sqrt(0.5), std::sqrt(0.5)});
    auto l = m.measure_of(psi).support()[0];
    auto r = m.row(MeasurementContext::whole(Observable::diagonal({1.0, -1.0})), l);
    EXPECT_NEAR(r[0], 0.5, 1e-15);
    EXPECT_NEAR(r[1], 0.5, 1e-15);
}

TEST(BornModel, TablesAreDeterministic) {
    BornModel m;
    Rng rng(crq::testing::kSeed);
    auto psi = crq::testing::random_state(rng, {3});
    auto ctx = MeasurementContext::whole(crq::testing::random_observable(rng, 3, 3));
    auto l = m.measure_of(psi).support();
    EXPECT_EQ(m.table_of(ctx, l).rows(), m.table_of(ctx, l).rows());
}

TEST(CheckCq, BornPasses) {
    BornModel m;
    Rng rng(crq::testing::kSeed + 1);
    auto psi = crq::testing::random_state(rng, {2, 3});
    MeasurementContext ctx({2, 3}, {{crq::testing::random_observable(rng, 2, 2), {0}, Party::A},
                                    {crq::testing::random_observable(rng, 3, 3), {1}, Party::B}});
    auto c = check_cq(m, psi, ctx);
    EXPECT_TRUE(c.passed);
    EXPECT_LT(c.worst_deviation, 1e-12);
}

TEST(CheckCq, PerturbedTwoPointWeights) {
    auto good = two_point_model(0.3);
    EXPECT_TRUE(check_cq(good, real_state({2}, {std::sqrt(0.3), std::sqrt(0.7)}), z01()).passed);
    auto bad = two_point_model(0.35);
    auto c = check_cq(bad, real_state({2}, {std::sqrt(0.3), std::sqrt(0.7)}), z01());
    EXPECT_FALSE(c.passed);
    EXPECT_NEAR(c.worst_deviation, 0.05 * 1.0, 1e-12);
    ASSERT_TRUE(c.witness.has_value());
}

TEST(CheckCq, DimensionMismatch) {
    BornModel m;
    try {
        check_cq(m, State::basis({3}, 0), z01());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
}

TEST(CheckUi, IdentityAndBornPass) {
    BornModel m;
    Rng rng(crq::testing::kSeed + 2);
    auto psi = crq::testing::random_state(rng, {3});
    auto ctx = MeasurementContext::whole(crq::testing::random_observable(rng, 3, 3));
    EXPECT_TRUE(check_ui(m, psi, Unitary::identity({3}), ctx).passed);
    EXPECT_TRUE(check_ui(m, psi, Unitary::whole(crq::testing::random_unitary(rng, 3)), ctx).passed);
}

TEST(CheckUi, ConjugationIgnoringModelFails) {
    ConjugationIgnoringModel m;
    auto c = check_ui(m, State::basis({2}, 0), Unitary::whole(swap2()), z01());
    EXPECT_FALSE(c.passed);
    EXPECT_NEAR(c.worst_deviation, 1.0, 1e-12);
}

TEST(CheckCp, EqualStatesPassExactly) {
    BornModel m;
    auto psi = real_state({2}, {0.6, 0.8});
    auto c = check_cp(m, psi, psi, z01(), std::sqrt(2.0));
    EXPECT_TRUE(c.passed);
    EXPECT_EQ(c.worst_deviation, 0.0);
}

TEST(CheckCp, BornNearbyStatesPass) {
    BornModel m;
    Rng rng(crq::testing::kSeed + 3);
    for (int trial = 0; trial < 10; ++trial) {
        auto psi = crq::testing::random_state(rng, {3});
        auto delta = crq::testing::random_state(rng, {3});
        auto a = psi.to_dense(), b = delta.to_dense();
        std::vector<Complex> mix(3);
        for (int i = 0; i < 3; ++i) mix[i] = a[i] + 0.15 * b[i];
        double s = 0.0;
        for (auto& x : mix) s += std::norm(x);
        for (auto& x : mix) x /= std::sqrt(s);
        auto phi = State::from_dense({3}, mix);
        auto ctx = MeasurementContext::whole(crq::testing::random_observable(rng, 3, 3));
        EXPECT_TRUE(check_cp(m, psi, phi, ctx, std::sqrt(2.0)).passed);
    }
}

TEST(CheckCp, JumpModelFails) {
    auto psi = real_state({2}, {std::sqrt(0.75), std::sqrt(0.25)});
    // eps = 1 - cos(d) ~ 1e-4
    double d = std::acos(1.0 - 1e-4);
    double t = std::acos(std::sqrt(0.75)) + d;
    auto phi = real_state({2}, {std::cos(t), std::sin(t)});
    auto m = crq::testing::cp_jump_model(psi);
    auto c = check_cp(*m, psi, phi, z01(), std::sqrt(2.0));
    EXPECT_FALSE(c.passed);
    EXPECT_GT(c.worst_deviation, 0.45);
}

TEST(CheckPi, BornPasses) {
    BornModel m;
    Rng rng(crq::testing::kSeed + 4);
    auto psi = crq::testing::random_state(rng, {2, 2});
    m.measure_of(psi);
    MeasurementContext ctx({2, 2}, {{crq::testing::random_observable(rng, 2, 2), {0}, Party::A},
                                    {crq::testing::random_observable(rng, 2, 2), {1}, Party::B}});
    EXPECT_TRUE(check_pi(m, ctx).passed);
}

TEST(CheckPi, ProductTablePassesExactly) {
    TabularModel m;
    m.add_label("l");
    auto za = MeasurementContext::single({2, 2}, Observable::diagonal({0, 1}), {0}, Party::A);
    auto zb = MeasurementContext::single({2, 2}, Observable::diagonal({0, 1}), {1}, Party::B);
    MeasurementContext joint({2, 2}, {{Observable::diagonal({0, 1}), {0}, Party::A},
                                      {Observable::diagonal({0, 1}), {1}, Party::B}});
    m.add_table(za, {{"l", {0.25, 0.75}}});
    m.add_table(zb, {{"l", {0.5, 0.5}}});
    m.add_table(joint, {{"l", {0.125, 0.125, 0.375, 0.375}}});
    auto c = check_pi(m, joint);
    EXPECT_TRUE(c.passed);
    EXPECT_EQ(c.worst_deviation, 0.0);
}

TEST(CheckPi, SignalingFixtureFails) {
    auto m = TabularModel::from_file(crq::testing::fixture_path("signaling.json"));
    Eigen::MatrixXcd z = Observable::diagonal({1, -1}).matrix();
    MeasurementContext zx({2, 2}, {{Observable(z), {0}, Party::A}, {Observable(swap2()), {1}, Party::B}});
    MeasurementContext zz({2, 2}, {{Observable(z), {0}, Party::A}, {Observable(z), {1}, Party::B}});
    EXPECT_TRUE(check_pi(m, zz).passed);
    auto c = check_pi(m, zx);
    EXPECT_FALSE(c.passed);
    EXPECT_NEAR(c.worst_deviation, 0.1, 1e-12);
    ASSERT_TRUE(c.witness.has_value());
    EXPECT_EQ(c.witness->label, "s0");
}

TEST(CheckPi, Malformed) {
    BornModel m;
    auto single = MeasurementContext::single({2, 2}, Observable::diagonal({0, 1}), {0}, Party::A);
    try {
        check_pi(m, single);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MalformedContext);
    }
}

TEST(CheckPe, BornPasses) {
    BornModel m;
    Rng rng(crq::testing::kSeed + 5);
    auto p1 = crq::testing::random_state(rng, {3});
    auto p2 = crq::testing::random_state(rng, {2});
    EXPECT_TRUE(check_pe(m, p1, p2, MeasurementContext::whole(crq::testing::random_observable(rng, 3, 3))).passed);
}

TEST(CheckPe, TrivialPartnerPassesVacuously) {
    ExtensionShiftModel m(0.2);
    auto c = check_pe(m, real_state({2}, {0.6, 0.8}), State::basis({1}, 0), z01());
    EXPECT_TRUE(c.passed);
}

TEST(CheckPe, ShiftedExtensionFails) {
    ExtensionShiftModel m(0.2);
    auto c = check_pe(m, real_state({2}, {0.6, 0.8}), State::basis({2}, 0), z01());
    EXPECT_FALSE(c.passed);
    EXPECT_NEAR(c.worst_deviation, 0.2, 1e-12);
}

TEST(CheckSe, BornPasses) {
    BornModel m;
    std::vector<State> e{State::basis({2}, 0), State::basis({2}, 1)};
    double h = std::sqrt(0.5);
    EXPECT_TRUE(check_se(m, z01(), e, {h, h}, e).passed);
}

TEST(CheckSe, SingleTermIsProductExtension) {
    BornModel m;
    auto u = real_state({3}, {0.6, 0.0, 0.8});
    auto se = check_se(m, z01(), {State::basis({2}, 1)}, {1.0}, {u});
    auto pe = check_pe(m, State::basis({2}, 1), u, z01());
    EXPECT_TRUE(se.passed);
    EXPECT_EQ(se.worst_deviation, pe.worst_deviation);
}

TEST(CheckSe, SwappedExtensionFails) {
    ExtensionSwapModel m;
    std::vector<State> e{State::basis({2}, 0), State::basis({2}, 1)};
    auto c = check_se(m, z01(), e, {0.6, 0.8}, e);
    EXPECT_FALSE(c.passed);
    EXPECT_NEAR(c.worst_deviation, std::abs(0.36 - 0.64), 1e-12);
}

TEST(CheckSe, Preconditions) {
    BornModel m;
    std::vector<State> e{State::basis({2}, 0), State::basis({2}, 1)};
    try {
        check_se(m, z01(), e, {0.6, 0.6}, e);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), ErrorKind::NotNormalized);
    }
    try {
        check_se(m, z01(), e, {0.6, 0.8}, {State::basis({2}, 0), State::basis({2}, 0)});
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), ErrorKind::NotOrthonormal);
    }
}

TEST(CheckLemma1, IdentityAndRandomUnitaries) {
    BornModel m;
    Rng rng(crq::testing::kSeed + 6);
    auto psi = crq::testing::random_state(rng, {2, 2});
    auto cx = MeasurementContext::single({2, 2}, Observable::diagonal({0, 1}), {0}, Party::A);
    auto cy = MeasurementContext::single({2, 2}, Observable(hadamard()), {1}, Party::B);
    EXPECT_TRUE(check_lemma1(m, psi, Unitary::identity({2, 2}), Unitary::identity({2, 2}), cx, cy).passed);
    auto u1 = Unitary::dense({2, 2}, crq::testing::random_unitary(rng, 2), {0});
    auto u2 = Unitary::dense({2, 2}, crq::testing::random_unitary(rng, 2), {1});
    EXPECT_TRUE(check_lemma1(m, psi, u1, u2, cx, cy).passed);
}

TEST(CheckLemma1, SignalingModelFails) {
    crq::testing::SignalingModel m(0.1);
    auto psi = real_state({2, 2}, {std::sqrt(0.5), 0, 0, std::sqrt(0.5)});
    auto cx = MeasurementContext::single({2, 2}, Observable::diagonal({0, 1}), {0}, Party::A);
    auto cy = MeasurementContext::single({2, 2}, Observable(hadamard()), {1}, Party::B);
    auto u1 = Unitary::dense({2, 2}, hadamard(), {0});
    auto u2 = Unitary::dense({2, 2}, hadamard(), {1});
    auto c = check_lemma1(m, psi, u1, u2, cx, cy);
    EXPECT_FALSE(c.passed);
}

TEST(Conditioning, FullEventIsIdentity) {
    BornModel m;
    Rng rng(crq::testing::kSeed + 7);
    auto psi = crq::testing::random_state(rng, {3});
    auto ctx = MeasurementContext::whole(crq::testing::random_observable(rng, 3, 3));
    auto t = m.table_of(ctx, m.measure_of(psi).support());
    auto c = condition_table(t, [](const std::vector<std::size_t>&) { return true; });
    EXPECT_EQ(c.rows(), t.rows());
}

TEST(Conditioning, UniformHalfAndIdempotent) {
    TabularModel m;
    m.add_label("l");
    auto ctx = MeasurementContext::whole(Observable::diagonal({0, 1, 2, 3}));
    m.add_table(ctx, {{"l", {0.25, 0.25, 0.25, 0.25}}});
    auto t = m.table_of(ctx, std::vector<Label>{"l"});
    OutcomeEvent ev = [](const std::vector<std::size_t>& i) { return i[0] < 2; };
    auto c = condition_table(t, ev);
    EXPECT_EQ(c.row(0), (std::vector<double>{0.5, 0.5, 0.0, 0.0}));
    EXPECT_EQ(condition_table(c, ev).rows(), c.rows());
}

TEST(Conditioning, NullEventRowIsDegenerate) {
    TabularModel m;
    m.add_label("a");
    m.add_label("b");
    auto ctx = MeasurementContext::whole(Observable::diagonal({0, 1}));
    m.add_table(ctx, {{"a", {1.0, 0.0}}, {"b", {0.5, 0.5}}});
    auto t = m.table_of(ctx, std::vector<Label>{"a", "b"});
    auto c = condition_table(t, [](const std::vector<std::size_t>& i) { return i[0] == 1; });
    EXPECT_TRUE(c.degenerate(std::size_t{0}));
    EXPECT_EQ(c.row(0), (std::vector<double>{0.0, 0.0}));
    EXPECT_FALSE(c.degenerate(std::size_t{1}));
    EXPECT_EQ(c.row(1), (std::vector<double>{0.0, 1.0}));
}

TEST(Conditioning, EmptyEventThrows) {
    BornModel m;
    auto ctx = z01();
    auto t = m.table_of(ctx, m.measure_of(State::basis({2}, 0)).support());
    try {
        condition_table(t, [](const std::vector<std::size_t>&) { return false; });
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptyEvent);
    }
}

TEST(TabularModel, JsonRoundTrip) {
    auto m = TabularModel::from_file(crq::testing::fixture_path("signaling.json"));
    auto back = TabularModel::from_json(m.to_json());
    EXPECT_EQ(back.labels(), m.labels());
    EXPECT_EQ(back.tables().size(), m.tables().size());
    auto bell = real_state({2, 2}, {std::sqrt(0.5), 0, 0, std::sqrt(0.5)});
    EXPECT_EQ(back.measure_of(bell).weights(), m.measure_of(bell).weights());
}

TEST(TabularModel, UncoveredContext) {
    auto m = TabularModel::from_file(crq::testing::fixture_path("signaling.json"));
    auto ctx = MeasurementContext::single({2, 2}, Observable(hadamard()), {0}, Party::A);
    try {
        m.row(ctx, "s0");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UncoveredContext);
    }
}

TEST(Fixtures, PredeterminedRowsAreDeterministic) {
    crq::testing::PredeterminedModel m;
    MeasurementContext ctx({2, 2}, {{Observable::diagonal({1, -1}), {0}, Party::A},
                                    {Observable::diagonal({1, -1}), {1}, Party::B}});
    for (const auto& l : m.labels()) {
        auto r = m.row(ctx, l);
        EXPECT_EQ(std::count(r.begin(), r.end(), 1.0), 1);
        EXPECT_EQ(std::count(r.begin(), r.end(), 0.0), 3);
    }
    auto bell = real_state({2, 2}, {std::sqrt(0.5), 0, 0, std::sqrt(0.5)});
    auto x0 = MeasurementContext::single({2, 2}, Observable::diagonal({1, -1}), {0}, Party::A);
    EXPECT_TRUE(check_cq(m, bell, x0).passed);
    Eigen::MatrixXcd h = hadamard();
    MeasurementContext zh({2, 2}, {{Observable::diagonal({1, -1}), {0}, Party::A}, {Observable(h), {1}, Party::B}});
    EXPECT_FALSE(check_cq(m, bell, zh).passed);
}

TEST(Fixtures, PerturbedMeasureFailsCqOnly) {
    crq::testing::PerturbedMeasureModel m;
    auto psi = real_state({2}, {0.6, 0.8});
    auto c = check_cq(m, psi, z01());
    EXPECT_FALSE(c.passed);
    EXPECT_NEAR(c.worst_deviation, 0.05 * std::abs(0.64 - 0.5), 1e-12);
}

TEST(Certificate, PassedIffWithinBound) {
    EXPECT_TRUE(Certificate::make("x", 0.1, 0.1).passed);
    EXPECT_FALSE(Certificate::make("x", 0.1000001, 0.1).passed);
    auto all = Certificate::all_of("all", {Certificate::make("a", 0, 1), Certificate::make("b", 2, 1)});
    EXPECT_FALSE(all.passed);
    ASSERT_NE(all.first_failure(), nullptr);
    EXPECT_EQ(all.first_failure()->check_name, "b");
    auto j = to_json(all);
    EXPECT_EQ(j["check_name"], "all");
    EXPECT_EQ(j["passed"], false);
}
