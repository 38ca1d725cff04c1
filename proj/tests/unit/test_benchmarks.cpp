#include <gtest/gtest.h>

#include <cmath>

#include "bermudan/benchmarks.hpp"
#include "fixtures.hpp"
#include "quadrature.hpp"

using namespace bermudan;

TEST(Benchmarks, JamshidianMatchesQuadrature) {
    const auto& m = fixtures::hw();
    for (bool payer : {true, false})
        for (auto [s, e] : {std::pair{1.0, 6.0}, {5.0, 15.0}, {10.0, 15.0}})
            for (double mny : {0.8, 1.0, 1.2}) {
                auto spec = fixtures::atm(m, ExerciseStyle::European, payer, s, e);
                spec.strike *= mny;
                const double q = oracle::swaption({}, payer, 100, spec.strike, spec.dates, false);
                EXPECT_NEAR(jamshidian_price(m, spec), q, 5e-4) << s << "x" << e - s << " " << mny;
            }
}

TEST(Benchmarks, JamshidianMatchesMonteCarlo) {
    const auto& m = fixtures::hw();
    const auto spec = fixtures::atm(m, ExerciseStyle::European, true, 5, 15);
    const auto mc = mc_european_price(m, spec, 100000, 3);
    EXPECT_NEAR(jamshidian_price(m, spec), mc.value, 3 * mc.se);
}

TEST(Benchmarks, PayerReceiverParity) {
    const auto& m = fixtures::hw();
    auto pay = fixtures::atm(m, ExerciseStyle::European, true, 2, 7);
    pay.strike = 0.027;
    auto rec = pay;
    rec.direction = -1;
    double annuity = 0.0;
    for (std::size_t j = 1; j < pay.dates.size(); ++j) annuity += std::exp(-0.03 * pay.dates[j]);
    const double swap = 100 * (std::exp(-0.06) - std::exp(-0.21) - 0.027 * annuity);
    EXPECT_NEAR(jamshidian_price(m, pay) - jamshidian_price(m, rec), swap, 1e-10);
}

TEST(Benchmarks, AnalyticReceiverMatchesJamshidian) {
    const auto& m = fixtures::hw();
    const auto rec = fixtures::atm(m, ExerciseStyle::European, false, 1, 6);
    EXPECT_NEAR(100 * hw_receiver_swaption(m, rec, 0.0, 0.0), jamshidian_price(m, rec), 1e-9);
    EXPECT_NEAR(100 * hw_receiver_swaption(m, rec, 0.4, 0.003), jamshidian_price(m, rec, 0.4, 0.003), 1e-9);
}

TEST(Benchmarks, DeltaMatchesStateBump) {
    // delta = dV/dx / dF/dx, F the receiver forward swap per unit notional
    const auto& m = fixtures::hw();
    for (bool payer : {false, true}) {
        const auto spec = fixtures::atm(m, ExerciseStyle::European, payer, 1, 6);
        const double t = 0.3, x = 0.002, h = 1e-6;
        auto forward_swap = [&](double y) {
            const auto c = coupon_amounts(spec);
            double f = -bond_price(m, t, spec.dates[0], std::vector<double>{y});
            for (std::size_t j = 1; j < spec.dates.size(); ++j) f += c[j - 1] * bond_price(m, t, spec.dates[j], std::vector<double>{y});
            return f;
        };
        auto value = [&](double y) { return jamshidian_price(m, spec, t, y) / spec.notional; };
        const double bump = (value(x + h) - value(x - h)) / (forward_swap(x + h) - forward_swap(x - h));
        EXPECT_NEAR(hw_swaption_delta(m, spec, t, x), bump, 1e-6) << (payer ? "payer" : "receiver");
    }
}

TEST(Benchmarks, HenrardRootSolvesEquation) {
    const auto& m = fixtures::hw();
    const auto spec = fixtures::atm(m, ExerciseStyle::European, false, 1, 6);
    const auto t = henrard_terms(m, spec, 0.5, -0.004);
    double lhs = 0.0;
    for (std::size_t j = 0; j < t.coupons.size(); ++j)
        lhs += t.coupons[j] * t.bonds[j] / t.bond0 * std::exp(-0.5 * t.alpha[j] * t.alpha[j] - t.alpha[j] * t.kappa);
    EXPECT_NEAR(lhs, 1.0, 1e-10);
}

TEST(Benchmarks, LsmIsLowerBiasedButClose) {
    const auto& m = fixtures::hw();
    const auto spec = fixtures::atm(m, ExerciseStyle::Bermudan, false, 1, 6);
    const double ref = oracle::swaption({}, false, 100, spec.strike, spec.dates, true);
    LsmOptions o;
    o.n_paths = 40000;
    o.n_runs = 2;
    const auto r = lsm_price(m, spec, o);
    EXPECT_LE(r.price.value, ref + 3 * r.price.se + 0.005);
    EXPECT_GE(r.price.value, ref - 0.05);
    EXPECT_LT(r.ci_low, r.price.value);
    EXPECT_GT(r.ci_high, r.price.value);
}

TEST(Benchmarks, LsmTwoFactorRuns) {
    const auto& m = fixtures::g2();
    const auto spec = fixtures::atm(m, ExerciseStyle::Bermudan, false, 1, 6);
    LsmOptions o;
    o.n_paths = 20000;
    o.n_runs = 2;
    const auto r = lsm_price(m, spec, o);
    EXPECT_GT(r.price.value, 2.5);
    EXPECT_LT(r.price.value, 2.8);
}

TEST(Benchmarks, JamshidianNeedsOneFactor) {
    const auto spec = fixtures::atm(fixtures::g2(), ExerciseStyle::European, false, 1, 6);
    EXPECT_THROW(jamshidian_price(fixtures::g2(), spec), std::domain_error);
}
