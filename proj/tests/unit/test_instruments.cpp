#include <gtest/gtest.h>

#include <cmath>

#include "bermudan/instruments.hpp"

using namespace bermudan;

namespace {

GaussianModel hw() { return GaussianModel::hull_white(0.01, 0.01, 0.03); }

}  // namespace

TEST(Instruments, FlatCurveAnnuity) {
    const auto m = hw();
    const auto spec = make_swaption(ExerciseStyle::Bermudan, false, 100, 0.03, 0, 5);
    const std::vector<double> x{0.0};
    double oracle = 0.0;
    for (int j = 1; j <= 5; ++j) oracle += std::exp(-0.03 * j);
    EXPECT_NEAR(annuity(m, 0.0, x, spec, 0), oracle, 1e-14);
    EXPECT_NEAR(annuity(m, 0.0, x, spec, 0), 4.573770, 5e-7);
}

TEST(Instruments, FlatCurveSwapRate) {
    const auto m = hw();
    const auto spec = make_swaption(ExerciseStyle::Bermudan, false, 100, 0.03, 1, 6);
    double a = 0.0;
    for (int j = 2; j <= 6; ++j) a += std::exp(-0.03 * j);
    const double oracle = (std::exp(-0.03) - std::exp(-0.18)) / a;
    EXPECT_NEAR(initial_swap_rate(m, spec), oracle, 1e-15);
    EXPECT_NEAR(initial_swap_rate(m, spec), 0.0304545, 5e-8);
}

TEST(Instruments, PayerIsNegatedReceiver) {
    const auto m = hw();
    const auto rec = make_swaption(ExerciseStyle::Bermudan, false, 100, 0.031, 1, 6);
    const auto pay = make_swaption(ExerciseStyle::Bermudan, true, 100, 0.031, 1, 6);
    for (double x : {-0.02, 0.0, 0.015})
        for (std::size_t k = 0; k < 5; ++k) {
            const std::vector<double> s{x};
            EXPECT_NEAR(exercise_value(m, s, pay, k), -exercise_value(m, s, rec, k), 1e-12);
        }
}

TEST(Instruments, ExerciseValueIsSwapValue) {
    // h_m = delta N (P(T_m,T_m) - P(T_m,T_M) - K A) with delta = +1 for payers
    const auto m = hw();
    const auto pay = make_swaption(ExerciseStyle::Bermudan, true, 100, 0.029, 1, 6);
    const std::vector<double> x{0.004};
    const std::size_t k = 2;
    const double Tk = pay.dates[k];
    double a = 0.0;
    for (std::size_t j = k + 1; j < pay.dates.size(); ++j) a += bond_price(m, Tk, pay.dates[j], x);
    const double expect = 100 * (1.0 - bond_price(m, Tk, 6.0, x) - 0.029 * a);
    EXPECT_NEAR(exercise_value(m, x, pay, k), expect, 1e-12);
    ExercisePayoff h(m, pay, k);
    EXPECT_NEAR(h(x), expect, 1e-12);
    EXPECT_DOUBLE_EQ(h.exercise_date(), Tk);
}

TEST(Instruments, ScheduleAndCounts) {
    const auto b = make_swaption(ExerciseStyle::Bermudan, false, 100, 0.03, 1, 11);
    EXPECT_EQ(b.periods(), 10u);
    EXPECT_EQ(b.exercise_count(), 10u);
    const auto e = make_swaption(ExerciseStyle::European, true, 100, 0.03, 5, 15);
    EXPECT_EQ(e.exercise_count(), 1u);
    const auto q = make_schedule(1.0, 3.0, 4);
    ASSERT_EQ(q.size(), 9u);
    EXPECT_NEAR(q[1], 1.25, 1e-15);
}

TEST(Instruments, ValidationRejectsBadContracts) {
    EXPECT_THROW(make_swaption(ExerciseStyle::Bermudan, false, -1, 0.03, 1, 6), std::invalid_argument);
    EXPECT_THROW(make_swaption(ExerciseStyle::Bermudan, false, 100, 0.03, 6, 1), std::invalid_argument);
    BermudanSpec s = make_swaption(ExerciseStyle::Bermudan, false, 100, 0.03, 1, 6);
    s.direction = 0;
    EXPECT_THROW(validate(s), std::invalid_argument);
}
