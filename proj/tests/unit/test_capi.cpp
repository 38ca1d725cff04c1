#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "bermudan/bermudan.h"

namespace {

struct Handles {
    bh_model* model = nullptr;
    bh_contract* contract = nullptr;
    bh_hedge* hedge = nullptr;
    ~Handles() {
        bh_hedge_free(hedge);
        bh_contract_free(contract);
        bh_model_free(model);
    }
};

bh_train_config quick() {
    bh_train_config c;
    bh_train_config_default(&c);
    c.n_paths = 4000;
    c.q = 16;
    c.epochs = 300;
    return c;
}

}  // namespace

TEST(CApi, NullArgumentsAreRejected) {
    EXPECT_EQ(bh_model_hull_white(0.01, 0.01, 0.03, nullptr), BH_ERR_INVALID_ARGUMENT);
    EXPECT_NE(std::string(bh_last_error()).find("null"), std::string::npos);
    double v = 0;
    EXPECT_EQ(bh_jamshidian(nullptr, nullptr, &v), BH_ERR_INVALID_ARGUMENT);
    bh_model_free(nullptr);
    EXPECT_EQ(bh_hedge_dates(nullptr), 0u);
}

TEST(CApi, BadModelParameters) {
    bh_model* m = nullptr;
    EXPECT_EQ(bh_model_hull_white(-0.01, 0.01, 0.03, &m), BH_ERR_INVALID_ARGUMENT);
    EXPECT_EQ(m, nullptr);
    EXPECT_STRNE(bh_last_error(), "");
    const double a[2] = {0.07, 0.08}, s[2] = {0.015, 0.008}, rho[4] = {1, 2, 2, 1};
    EXPECT_EQ(bh_model_gaussian(2, a, s, rho, 0.03, &m), BH_ERR_INVALID_ARGUMENT);
}

TEST(CApi, StatusNames) {
    EXPECT_STREQ(bh_status_name(BH_OK), "ok");
    EXPECT_STREQ(bh_status_name(BH_ERR_DOMAIN), "domain error");
    EXPECT_STRNE(bh_version(), "");
}

TEST(CApi, ModelAndContract) {
    Handles h;
    ASSERT_EQ(bh_model_g2pp(0.07, 0.08, 0.015, 0.008, -0.6, 0.03, &h.model), BH_OK);
    EXPECT_EQ(bh_model_factors(h.model), 2u);
    const double x[2] = {0, 0};
    double p = 0;
    ASSERT_EQ(bh_model_bond_price(h.model, 0.0, 4.0, x, &p), BH_OK);
    EXPECT_NEAR(p, std::exp(-0.12), 1e-14);

    ASSERT_EQ(bh_contract_new(BH_BERMUDAN, 0, 100, 0.03, 1, 6, 1, &h.contract), BH_OK);
    EXPECT_EQ(bh_contract_exercise_count(h.contract), 5u);
    double s = 0;
    ASSERT_EQ(bh_contract_swap_rate(h.model, h.contract, &s), BH_OK);
    EXPECT_NEAR(s, 0.0304545, 5e-8);
    EXPECT_EQ(bh_contract_set_strike(h.contract, s), BH_OK);
    EXPECT_DOUBLE_EQ(bh_contract_strike(h.contract), s);

    double v = 0;
    EXPECT_EQ(bh_jamshidian(h.model, h.contract, &v), BH_ERR_DOMAIN);
    bh_contract* bad = nullptr;
    EXPECT_EQ(bh_contract_new(BH_BERMUDAN, 0, 100, 0.03, 6, 1, 1, &bad), BH_ERR_INVALID_ARGUMENT);
}

TEST(CApi, FitSaveLoadBoundsAndHedge) {
    Handles h;
    ASSERT_EQ(bh_model_hull_white(0.01, 0.01, 0.03, &h.model), BH_OK);
    ASSERT_EQ(bh_contract_new(BH_BERMUDAN, 0, 100, 0.0304545, 1, 6, 1, &h.contract), BH_OK);
    const auto cfg = quick();
    ASSERT_EQ(bh_hedge_fit(h.model, h.contract, &cfg, 42, &h.hedge), BH_OK) << bh_last_error();
    EXPECT_EQ(bh_hedge_dates(h.hedge), 5u);
    EXPECT_NEAR(bh_hedge_direct(h.hedge), 2.538, 0.05);

    bh_date_diagnostics d{};
    EXPECT_EQ(bh_hedge_diagnostics(h.hedge, 4, &d), BH_OK);
    EXPECT_DOUBLE_EQ(d.date, 5.0);
    EXPECT_EQ(bh_hedge_diagnostics(h.hedge, 5, &d), BH_ERR_DOMAIN);

    const double x0[1] = {0.0};
    double g0 = 0;
    ASSERT_EQ(bh_hedge_value(h.hedge, 0, 0.0, x0, &g0), BH_OK);
    EXPECT_DOUBLE_EQ(g0, bh_hedge_direct(h.hedge));

    const auto file = (std::filesystem::temp_directory_path() / "bermudan_capi_hedge.txt").string();
    ASSERT_EQ(bh_hedge_save(h.hedge, file.c_str()), BH_OK);
    bh_hedge* loaded = nullptr;
    ASSERT_EQ(bh_hedge_load(h.model, file.c_str(), &loaded), BH_OK);
    EXPECT_EQ(bh_hedge_direct(loaded), bh_hedge_direct(h.hedge));
    bh_hedge_free(loaded);
    std::filesystem::remove(file);
    EXPECT_EQ(bh_hedge_load(h.model, "/nonexistent/hedge.txt", &loaded), BH_ERR_IO);

    bh_bound_options bo;
    bh_bound_options_default(&bo);
    bo.n_paths = 5000;
    bo.n_runs = 2;
    bh_bounds* b = nullptr;
    ASSERT_EQ(bh_bounds_estimate(h.hedge, &bo, &b), BH_OK);
    bh_bound_summary s{};
    bh_bounds_summary(b, &s);
    EXPECT_EQ(s.n_runs, 2u);
    EXPECT_GT(s.upper, 2.4);
    bh_bound_run run{};
    EXPECT_EQ(bh_bounds_run(b, 1, &run), BH_OK);
    EXPECT_EQ(bh_bounds_run(b, 2, &run), BH_ERR_DOMAIN);
    double mean = 0, se = 0;
    EXPECT_EQ(bh_bounds_increment(b, 0, 3, &mean, &se), BH_OK);
    bh_bounds_free(b);

    bh_hedge_report* r = nullptr;
    ASSERT_EQ(bh_hedge_error_semistatic(h.hedge, 500, 3, 0, &r), BH_OK);
    bh_hedge_summary hs{};
    bh_report_summary(r, &hs);
    size_t n = 0;
    const double* errs = bh_report_errors(r, &n);
    EXPECT_EQ(n, 500u);
    EXPECT_NE(errs, nullptr);
    EXPECT_EQ(hs.n_paths, 500u);
    EXPECT_STREQ(bh_report_strategy(r), "semistatic");
    bh_report_free(r);
}

TEST(CApi, ShapeMismatchIsContractError) {
    Handles h;
    ASSERT_EQ(bh_model_hull_white(0.01, 0.01, 0.03, &h.model), BH_OK);
    ASSERT_EQ(bh_contract_new(BH_EUROPEAN, 0, 100, 0.03, 1, 3, 1, &h.contract), BH_OK);
    auto cfg = quick();
    cfg.epochs = 20;
    ASSERT_EQ(bh_hedge_fit(h.model, h.contract, &cfg, 1, &h.hedge), BH_OK);
    const auto file = (std::filesystem::temp_directory_path() / "bermudan_capi_shape.txt").string();
    ASSERT_EQ(bh_hedge_save(h.hedge, file.c_str()), BH_OK);
    bh_model* g2 = nullptr;
    ASSERT_EQ(bh_model_g2pp(0.07, 0.08, 0.015, 0.008, -0.6, 0.03, &g2), BH_OK);
    bh_hedge* loaded = nullptr;
    EXPECT_EQ(bh_hedge_load(g2, file.c_str(), &loaded), BH_ERR_CONTRACT);
    bh_model_free(g2);
    std::filesystem::remove(file);
}

TEST(CApi, BenchmarksThroughHandles) {
    Handles h;
    ASSERT_EQ(bh_model_hull_white(0.01, 0.01, 0.03, &h.model), BH_OK);
    ASSERT_EQ(bh_contract_new(BH_EUROPEAN, 1, 100, 0.03, 5, 15, 1, &h.contract), BH_OK);
    double jam = 0, mc = 0, se = 0, delta = 0;
    ASSERT_EQ(bh_jamshidian(h.model, h.contract, &jam), BH_OK);
    ASSERT_EQ(bh_mc_european(h.model, h.contract, 20000, 1, &mc, &se), BH_OK);
    EXPECT_NEAR(jam, mc, 4 * se);
    ASSERT_EQ(bh_hw_delta(h.model, h.contract, 0.0, 0.0, &delta), BH_OK);
    EXPECT_LT(delta, 0.0);
    EXPECT_GT(delta, -1.0);

    bh_hedge_report* r = nullptr;
    ASSERT_EQ(bh_hedge_error_dynamic(h.model, h.contract, 20, 200, 2, &r), BH_OK);
    bh_hedge_summary s{};
    bh_report_summary(r, &s);
    EXPECT_GT(s.sd, 0.0);
    bh_report_free(r);

    bh_lsm_options lo;
    bh_lsm_options_default(&lo);
    lo.n_paths = 5000;
    lo.n_runs = 2;
    bh_lsm_result lr{};
    ASSERT_EQ(bh_lsm_price(h.model, h.contract, &lo, &lr), BH_OK);
    EXPECT_EQ(lr.n_runs, 2u);
}

TEST(CApi, ThreadSetting) {
    bh_set_threads(3);
    EXPECT_EQ(bh_threads(), 3u);
    bh_set_threads(0);
    EXPECT_GE(bh_threads(), 1u);
}
