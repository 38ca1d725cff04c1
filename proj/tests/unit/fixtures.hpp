#pragma once

// Small trained hedges shared by several test files, fitted once per process.

#include "bermudan/engine.hpp"

namespace fixtures {

inline const bermudan::GaussianModel& hw() {
    static const auto m = bermudan::GaussianModel::hull_white(0.01, 0.01, 0.03);
    return m;
}

inline const bermudan::GaussianModel& g2() {
    static const auto m = bermudan::GaussianModel::g2pp(0.07, 0.08, 0.015, 0.008, -0.6, 0.03);
    return m;
}

inline bermudan::BermudanSpec atm(const bermudan::GaussianModel& m, bermudan::ExerciseStyle style, bool payer,
                                  double start, double end) {
    auto spec = bermudan::make_swaption(style, payer, 100.0, 0.03, start, end);
    spec.strike = bermudan::initial_swap_rate(m, spec);
    return spec;
}

inline bermudan::TrainConfig small_config(std::size_t q = 32) {
    bermudan::TrainConfig cfg;
    cfg.q = q;
    cfg.n_paths = 10000;
    cfg.optimizer.epochs = 1000;
    cfg.optimizer.patience = 50;
    return cfg;
}

// 1Y x 5Y receiver Bermudan under Hull-White.
inline const bermudan::HedgeSet& bermudan_1f() {
    static const auto h = bermudan::fit_hedge(
        hw(), atm(hw(), bermudan::ExerciseStyle::Bermudan, false, 1, 6), small_config(), 42);
    return h;
}

// 1Y x 5Y receiver European under Hull-White.
inline const bermudan::HedgeSet& european_1f() {
    static const auto h = bermudan::fit_hedge(
        hw(), atm(hw(), bermudan::ExerciseStyle::European, false, 1, 6), small_config(), 42);
    return h;
}

}  // namespace fixtures
