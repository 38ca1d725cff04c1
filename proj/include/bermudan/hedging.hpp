#pragma once
// Hedge-error experiments on risk-neutral paths: static portfolio vs daily
// delta hedge for a European swaption, and the semi-static Bermudan hedge.
// Errors are hedge value minus liability, in basis points of notional.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bermudan/engine.hpp"

namespace bermudan {

struct HedgeErrorReport {
    std::string strategy;
    std::vector<double> errors;  // bp of notional, one per path
    double mean = 0.0;
    double sd = 0.0;
    double p95 = 0.0;      // 95th percentile of the signed errors
    double p95_abs = 0.0;  // 95th percentile of |errors|
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
};

/// Fills mean, sd and percentiles from errors.
void summarize(HedgeErrorReport& rep);

/// G_0(z(T_0)) - max(h_0, 0) per path.
HedgeErrorReport static_hedge_error(const HedgeSet& hedge, const GaussianModel& model,
                                    std::size_t n_paths, std::uint64_t seed, double dt = 1.0 / 52.0);

/// Self-financing delta hedge in the receiver forward swap and the money
/// market, started from the exact premium and rebalanced `rebalances` times
/// at equidistant dates in [0, T_0). One-factor models only.
HedgeErrorReport dynamic_hedge_error(const GaussianModel& model, const BermudanSpec& spec,
                                     std::size_t rebalances, std::size_t n_paths,
                                     std::uint64_t seed);

/// HE = sum_m (G_m(z_m(T_m)) - V_m) 1{T_m <= tau}, with V_m = max(C_m, h_m)
/// and tau the network stopping rule. With `discounted` the increments are
/// divided by the bank account.
HedgeErrorReport semistatic_bermudan_hedge_error(const HedgeSet& hedge, const GaussianModel& model,
                                                 std::size_t n_paths, std::uint64_t seed,
                                                 bool discounted = false, double dt = 1.0 / 52.0);

void write_hedge_summary_csv(std::ostream& out, const std::vector<HedgeErrorReport>& reports,
                             const std::vector<double>& moneyness);
void write_hedge_errors_csv(std::ostream& out, const HedgeErrorReport& rep);

}  // namespace bermudan
