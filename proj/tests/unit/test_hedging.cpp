#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bermudan/hedging.hpp"
#include "fixtures.hpp"

using namespace bermudan;

TEST(Hedging, SummaryStatistics) {
    HedgeErrorReport r;
    for (int i = 1; i <= 101; ++i) r.errors.push_back(i - 51.0);
    summarize(r);
    EXPECT_DOUBLE_EQ(r.mean, 0.0);
    EXPECT_NEAR(r.sd, std::sqrt(101.0 * 102.0 / 12.0), 1e-12);
    EXPECT_NEAR(r.p95, 45.0, 1e-12);
    EXPECT_NEAR(r.p95_abs, 48.0, 1e-12);
}

TEST(Hedging, StaticEuropeanHedgeIsTight) {
    const auto r = static_hedge_error(fixtures::european_1f(), fixtures::hw(), 5000, 13);
    EXPECT_EQ(r.errors.size(), 5000u);
    EXPECT_LT(r.sd, 0.5);
    EXPECT_LT(std::abs(r.mean), 0.5);
}

TEST(Hedging, DynamicErrorShrinksWithRebalancing) {
    const auto& m = fixtures::hw();
    const auto spec = fixtures::atm(m, ExerciseStyle::European, false, 1, 6);
    const auto coarse = dynamic_hedge_error(m, spec, 12, 3000, 5);
    const auto fine = dynamic_hedge_error(m, spec, 255, 3000, 5);
    EXPECT_LT(fine.sd, coarse.sd);
    EXPECT_GT(fine.sd, 1.0);
    EXPECT_LT(std::abs(fine.mean), 4 * fine.sd / std::sqrt(3000.0) + 1.0);
}

TEST(Hedging, DynamicHedgeNeedsOneFactor) {
    const auto spec = fixtures::atm(fixtures::g2(), ExerciseStyle::European, false, 1, 6);
    EXPECT_THROW(dynamic_hedge_error(fixtures::g2(), spec, 10, 10, 1), std::domain_error);
}

TEST(Hedging, SemistaticBermudanHedge) {
    const auto r = semistatic_bermudan_hedge_error(fixtures::bermudan_1f(), fixtures::hw(), 5000, 17);
    EXPECT_EQ(r.n_paths, 5000u);
    EXPECT_LT(r.sd, 5.0);  // bp, small fixture fit; price is about 254 bp
    EXPECT_LT(std::abs(r.mean), 0.5);
    const auto d = semistatic_bermudan_hedge_error(fixtures::bermudan_1f(), fixtures::hw(), 5000, 17, true);
    // discounting only rescales each increment by a factor near one
    EXPECT_NEAR(d.sd, r.sd, 0.2 * r.sd);
}

TEST(Hedging, ErrorDumpHasOneRowPerPath) {
    HedgeErrorReport r;
    r.errors = {0.5, -1.25};
    std::stringstream s;
    write_hedge_errors_csv(s, r);
    EXPECT_EQ(s.str(), "path,error_bp\n0,0.5\n1,-1.25\n");
}
