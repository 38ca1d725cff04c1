#pragma once
// Reference prices: Jamshidian decomposition for European swaptions under
// Hull-White, Longstaff-Schwartz regression for Bermudans, the analytic
// Hull-White receiver swaption delta, and plain Monte Carlo Europeans.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bermudan/instruments.hpp"
#include "bermudan/simulation.hpp"
#include "bermudan/stats.hpp"

namespace bermudan {

/// Zero-coupon bond call/put at time t in state x: option expiring at
/// `expiry` on the bond maturing at `maturity`.
double zero_bond_call(const GaussianModel& model, double t, std::span<const double> x,
                      double expiry, double maturity, double strike);
double zero_bond_put(const GaussianModel& model, double t, std::span<const double> x,
                     double expiry, double maturity, double strike);

/// Coupons c_j = dT_j K, plus 1 on the last, paid at T_1..T_M.
std::vector<double> coupon_amounts(const BermudanSpec& spec);

/// Exact one-factor price of the European swaption exercisable at T_0,
/// at time t < T_0 in state x. Throws std::domain_error for d != 1.
double jamshidian_price(const GaussianModel& model, const BermudanSpec& spec, double t = 0.0,
                        double x = 0.0);

enum class LsmBasis { Auto, Quadratic1F, Quadratic2F };

struct LsmOptions {
    std::size_t n_paths = 200000;
    std::size_t n_runs = 10;
    std::uint64_t seed = 11;
    LsmBasis basis = LsmBasis::Auto;
    double dt = 1.0 / 52.0;
    bool out_of_sample = false;  // value the policy on fresh paths
};

struct LsmResult {
    Estimate price;  // mean over runs, SE = sd(runs)/sqrt(runs)
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::vector<double> runs;
    std::vector<std::string> warnings;
};

/// Regress-now Longstaff-Schwartz on in-the-money paths under the
/// T_M-forward measure.
LsmResult lsm_price(const GaussianModel& model, const BermudanSpec& spec, const LsmOptions& opts);

/// Solution kappa of sum_j c_j P(t,T_j)/P(t,T_0) exp(-alpha_j^2/2 - alpha_j kappa) = 1
/// with alpha_j^2 the variance of log(P(.,T_j)/P(.,T_0)) from t to T_0.
struct HenrardTerms {
    double kappa = 0.0;
    std::vector<double> alpha;
    std::vector<double> coupons;
    std::vector<double> bonds;  // P(t,T_j), j = 1..M
    double bond0 = 0.0;         // P(t,T_0)
    double residual = 0.0;
};
HenrardTerms henrard_terms(const GaussianModel& model, const BermudanSpec& spec, double t, double x);

/// Analytic receiver value and delta at a fixed time t for many states x,
/// with the bond and variance coefficients computed once.
class HwSwaptionAnalytics {
public:
    HwSwaptionAnalytics(const GaussianModel& model, const BermudanSpec& spec, double t);

    HenrardTerms terms(double x) const;
    /// Per unit notional.
    double receiver_value(double x) const;
    /// Payer contracts return receiver delta - 1.
    double delta(double x) const;

private:
    bool payer_;
    BondCoeffs bond0_;
    std::vector<BondCoeffs> bonds_;
    std::vector<double> coupons_, alpha_, nu_;
    double nu0_;
};

/// Receiver swaption value per unit notional: sum c_j P_j Phi(kappa + alpha_j) - P_0 Phi(kappa).
double hw_receiver_swaption(const GaussianModel& model, const BermudanSpec& spec, double t, double x);

/// Hedge ratio in units of the receiver forward swap sum c_j P(t,T_j) - P(t,T_0).
/// Receiver contracts use the analytic formula; payer delta = receiver delta - 1.
double hw_swaption_delta(const GaussianModel& model, const BermudanSpec& spec, double t, double x);

/// Monte Carlo European price under the T_M-forward measure.
Estimate mc_european_price(const GaussianModel& model, const BermudanSpec& spec,
                           std::size_t n_paths, std::uint64_t seed, double dt = 1.0 / 52.0);

}  // namespace bermudan
