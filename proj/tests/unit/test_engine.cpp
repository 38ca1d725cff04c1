#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "bermudan/benchmarks.hpp"
#include "bermudan/engine.hpp"
#include "bermudan/errors.hpp"
#include "fixtures.hpp"
#include "quadrature.hpp"

using namespace bermudan;

TEST(Engine, EuropeanDirectEstimateMatchesJamshidian) {
    const auto& h = fixtures::european_1f();
    const double exact = jamshidian_price(fixtures::hw(), h.spec);
    EXPECT_LT(std::abs(h.direct_estimate - exact) / exact, 0.005);
    ASSERT_EQ(h.dates(), 1u);
}

TEST(Engine, BermudanDirectEstimateNearReference) {
    const auto& h = fixtures::bermudan_1f();
    const double ref = oracle::swaption({}, false, 100, h.spec.strike, h.spec.dates, true);
    EXPECT_NEAR(h.direct_estimate, ref, 0.02);
    ASSERT_EQ(h.dates(), 5u);
    EXPECT_LT(h.diagnostics.back().discounted_mae, 0.0005 * 100);
}

TEST(Engine, DiagnosticsAreOrderedAndFinite) {
    const auto& h = fixtures::bermudan_1f();
    for (std::size_t m = 0; m < h.dates(); ++m) {
        EXPECT_EQ(h.diagnostics[m].index, m);
        EXPECT_DOUBLE_EQ(h.diagnostics[m].date, h.spec.dates[m]);
        EXPECT_TRUE(std::isfinite(h.diagnostics[m].mae));
        EXPECT_GE(h.diagnostics[m].epochs, 1u);
    }
}

TEST(Engine, MarginsFollowEpsilon) {
    const auto& h = fixtures::bermudan_1f();
    const auto e = error_margins(h);
    double eps = 0.0;
    for (const auto& d : h.diagnostics) eps = std::max(eps, d.discounted_mae);
    const double M = static_cast<double>(h.dates());
    EXPECT_DOUBLE_EQ(e.epsilon, eps);
    EXPECT_DOUBLE_EQ(e.direct, M * eps);
    EXPECT_DOUBLE_EQ(e.lower, 2 * (M - 1) * eps);
    EXPECT_DOUBLE_EQ(e.upper, M * (M - 1) * eps);
}

TEST(Engine, SameSeedSameHedge) {
    const auto& m = fixtures::hw();
    const auto spec = fixtures::atm(m, ExerciseStyle::European, true, 2, 5);
    auto cfg = fixtures::small_config(8);
    cfg.n_paths = 2000;
    cfg.optimizer.epochs = 50;
    const auto a = fit_hedge(m, spec, cfg, 3);
    const auto b = fit_hedge(m, spec, cfg, 3);
    const auto c = fit_hedge(m, spec, cfg, 4);
    EXPECT_EQ(a.direct_estimate, b.direct_estimate);
    EXPECT_EQ(a.networks[0].w2, b.networks[0].w2);
    EXPECT_NE(a.direct_estimate, c.direct_estimate);
}

TEST(Engine, HedgeSetRoundTrip) {
    const auto& h = fixtures::bermudan_1f();
    std::stringstream s;
    write_hedge_set(s, h);
    const auto back = read_hedge_set(s, fixtures::hw());
    EXPECT_EQ(back.direct_estimate, h.direct_estimate);
    ASSERT_EQ(back.dates(), h.dates());
    for (std::size_t m = 0; m < h.dates(); ++m) {
        EXPECT_EQ(back.networks[m].w1, h.networks[m].w1);
        EXPECT_EQ(back.diagnostics[m].discounted_mae, h.diagnostics[m].discounted_mae);
        const std::vector<double> x{0.01};
        EXPECT_EQ(portfolio_value(fixtures::hw(), 0.5, x, back.networks[m], back.inputs[m]),
                  portfolio_value(fixtures::hw(), 0.5, x, h.networks[m], h.inputs[m]));
    }
}

TEST(Engine, ReadRejectsGarbageAndWrongModel) {
    std::stringstream junk("not a hedge set");
    EXPECT_THROW(read_hedge_set(junk, fixtures::hw()), IoError);
    std::stringstream s;
    write_hedge_set(s, fixtures::bermudan_1f());
    EXPECT_THROW(read_hedge_set(s, fixtures::g2()), ContractError);
}

TEST(Engine, ConfigValidation) {
    const auto& m = fixtures::hw();
    const auto spec = fixtures::atm(m, ExerciseStyle::Bermudan, false, 1, 6);
    auto cfg = fixtures::small_config();
    cfg.wide_fraction = 1.5;
    EXPECT_THROW(fit_hedge(m, spec, cfg, 1), std::invalid_argument);
    cfg = fixtures::small_config();
    cfg.n_paths = 0;
    EXPECT_THROW(fit_hedge(m, spec, cfg, 1), std::invalid_argument);
    cfg = fixtures::small_config();
    cfg.design = NetworkDesign::LocallyConnected;
    cfg.q = 7;
    EXPECT_THROW(fit_hedge(fixtures::g2(), spec, cfg, 1), std::invalid_argument);
}

TEST(Engine, TwoFactorDesignsTrain) {
    const auto& m = fixtures::g2();
    const auto spec = fixtures::atm(m, ExerciseStyle::European, false, 1, 6);
    for (auto design : {NetworkDesign::LocallyConnected, NetworkDesign::FullyConnectedLog}) {
        auto cfg = fixtures::small_config(16);
        cfg.design = design;
        cfg.n_paths = 5000;
        const auto h = fit_hedge(m, spec, cfg, 5);
        const auto mc = mc_european_price(m, spec, 100000, 9);
        EXPECT_NEAR(h.direct_estimate, mc.value, 0.03 + 3 * mc.se) << to_string(design);
    }
}
