#include <gtest/gtest.h>

#include <cmath>

#include "bermudan/bounds.hpp"
#include "bermudan/engine.hpp"
#include "fixtures.hpp"
#include "quadrature.hpp"

using namespace bermudan;

namespace {

const BoundReport& report() {
    static const auto r = [] {
        BoundOptions o;
        o.n_paths = 50000;
        o.n_runs = 2;
        return estimate_bounds(fixtures::bermudan_1f(), fixtures::hw(), o);
    }();
    return r;
}

}  // namespace

TEST(Bounds, MartingaleIncrementsHaveMeanZero) {
    for (const auto& run : report().runs) {
        ASSERT_EQ(run.increments.size(), fixtures::bermudan_1f().dates());
        for (std::size_t m = 0; m < run.increments.size(); ++m) {
            const auto& inc = run.increments[m];
            EXPECT_NEAR(inc.value, 0.0, 3 * inc.se) << "date " << m;
        }
    }
}

TEST(Bounds, BracketQuadraturePrice) {
    const auto& h = fixtures::bermudan_1f();
    const double ref = oracle::swaption({}, false, 100, h.spec.strike, h.spec.dates, true);
    const auto& r = report();
    EXPECT_LE(r.lower.value - 3 * r.lower.se, ref);
    EXPECT_GE(r.upper.value + 3 * r.upper.se, ref);
    EXPECT_LT(r.upper.value - r.lower.value, 0.05);
}

TEST(Bounds, GapWithinTheoreticalMargins) {
    const auto e = error_margins(fixtures::bermudan_1f());
    for (const auto& run : report().runs)
        EXPECT_LE(std::abs(run.upper.value - run.lower.value), e.lower + e.upper);
}

TEST(Bounds, SummaryAggregatesRuns) {
    const auto& r = report();
    ASSERT_EQ(r.runs.size(), 2u);
    EXPECT_NEAR(r.lower.value, 0.5 * (r.runs[0].lower.value + r.runs[1].lower.value), 1e-12);
    EXPECT_NEAR(r.upper.value, 0.5 * (r.runs[0].upper.value + r.runs[1].upper.value), 1e-12);
    EXPECT_EQ(r.n_paths, 50000u);
}

TEST(Bounds, MeasuresAgree) {
    BoundOptions o;
    o.n_paths = 40000;
    o.n_runs = 1;
    o.measure = Measure::RiskNeutral;
    const auto rn = estimate_bounds(fixtures::bermudan_1f(), fixtures::hw(), o);
    const auto& fw = report();
    const double se = std::hypot(rn.runs[0].lower.se, fw.runs[0].lower.se);
    EXPECT_NEAR(rn.lower.value, fw.lower.value, 4 * se);
    EXPECT_NEAR(rn.upper.value, fw.upper.value, 0.01);
}

TEST(Bounds, RunSeedsAreDistinct) {
    EXPECT_NE(bound_run_seed(7, 0), bound_run_seed(7, 1));
    EXPECT_NE(bound_run_seed(7, 0), training_path_seed(7));
}

TEST(Bounds, Reproducible) {
    const auto a = bound_run(fixtures::bermudan_1f(), fixtures::hw(), 2000, Measure::ForwardTM, 5);
    const auto b = bound_run(fixtures::bermudan_1f(), fixtures::hw(), 2000, Measure::ForwardTM, 5);
    EXPECT_EQ(a.lower.value, b.lower.value);
    EXPECT_EQ(a.upper.value, b.upper.value);
}
