#pragma once
// Gaussian affine short-rate model in the shifted mean-zero form
//
//   dx_i = -a_i x_i dt + vol_i dW_i,   d<W_i, W_j> = rho_ij dt,   x(0) = 0
//   r(t) = phi(t) + sum_i x_i(t)
//
// with phi(t) chosen so that the model reproduces a flat initial curve
// P(0,T) = exp(-f0 T). d = 1 is Hull-White, d = 2 is G2++.
//
// Bond prices are exponential-affine:  P(t,T) = exp(A(t,T) - B(t,T).x_t)
//   B_i(t,T) = (1 - exp(-a_i (T-t))) / a_i
//   A(t,T)   = -f0 (T-t) + (V(t,T) - V(0,T) + V(0,t)) / 2
// where V(t,T) is the variance of the integrated factor sum over [t,T].

#include <cstddef>
#include <span>
#include <vector>

namespace bermudan {

/// Constant-parameter Gaussian factor model on a flat initial forward curve.
class GaussianModel {
public:
    /// Builds a model from per-factor mean reversions and volatilities and a
    /// correlation matrix (row-major, d x d). Throws std::invalid_argument on
    /// a_i <= 0, vol_i <= 0, or a correlation matrix that is not symmetric
    /// PSD with unit diagonal.
    GaussianModel(std::vector<double> mean_reversion, std::vector<double> vol,
                  std::vector<double> correlation, double f0);

    /// Hull-White: dx = -a x dt + sigma dW.
    static GaussianModel hull_white(double a, double sigma, double f0);
    /// G2++ with correlated drivers.
    static GaussianModel g2pp(double a1, double a2, double sigma1, double sigma2, double rho,
                              double f0);
    /// Builds from a full volatility matrix sigma_ij acting on independent
    /// Brownian motions (row-major, d x d).
    static GaussianModel from_vol_matrix(std::vector<double> mean_reversion,
                                         std::vector<double> vol_matrix, double f0);

    std::size_t factors() const { return a_.size(); }
    double mean_reversion(std::size_t i) const { return a_[i]; }
    double vol(std::size_t i) const { return vol_[i]; }
    double correlation(std::size_t i, std::size_t j) const { return corr_[i * factors() + j]; }
    double f0() const { return f0_; }

    /// Volatility matrix sigma_ik on independent drivers: vol_i * L_ik, L the
    /// Cholesky factor of the correlation matrix.
    double vol_matrix(std::size_t i, std::size_t k) const { return chol_[i * factors() + k] * vol_[i]; }
    double cholesky(std::size_t i, std::size_t k) const { return chol_[i * factors() + k]; }

    /// rho_ij vol_i vol_j
    double covariation(std::size_t i, std::size_t j) const {
        return correlation(i, j) * vol_[i] * vol_[j];
    }

private:
    std::vector<double> a_;
    std::vector<double> vol_;
    std::vector<double> corr_;
    std::vector<double> chol_;
    double f0_;
};

/// Log-price intercept and factor loadings of P(t,T).
struct BondCoeffs {
    double A = 0.0;
    std::vector<double> B;

    /// exp(A - B.x)
    double price(std::span<const double> x) const;
};

/// (1 - exp(-a tau)) / a
double decay_integral(double a, double tau);

BondCoeffs bond_coeffs(const GaussianModel& model, double t, double T);

double bond_price(const GaussianModel& model, double t, double T, std::span<const double> x);

/// nu_k(t,T) = sum_i B_i(t,T) sigma_ik, the bond volatility on independent drivers.
std::vector<double> bond_volatility(const GaussianModel& model, double t, double T);

/// Var[ int_t^T sum_i x_i(u) du | F_t ].
double integrated_variance(const GaussianModel& model, double t, double T);

/// Deterministic shift phi(t) such that r = phi + sum x reproduces the flat curve.
double short_rate_shift(const GaussianModel& model, double t);

/// r(t) = phi(t) + sum_i x_i
double short_rate(const GaussianModel& model, double t, std::span<const double> x);

/// int_t^expiry || nu(u, maturity) - nu(u, expiry) ||^2 du: total log-variance
/// of the forward bond price P(., maturity)/P(., expiry) up to the expiry.
double bond_option_variance(const GaussianModel& model, double t, double expiry,
                            double maturity);

/// Theta_i(t, Tm): drift correction of x_i(Tm) under the Tm-forward measure.
std::vector<double> forward_drift_adjustment(const GaussianModel& model, double t, double Tm);

/// Conditional Gaussian moments of x(Tm) given x(t) under the Tm-forward measure.
struct GaussianMoments {
    std::vector<double> mean;
    std::vector<double> cov;  // row-major d x d
};

GaussianMoments forward_measure_moments(const GaussianModel& model, double t, double Tm,
                                        std::span<const double> x_t);

/// Conditional covariance of x(T) given x(t); identical under Q and every
/// forward measure.
std::vector<double> factor_covariance(const GaussianModel& model, double t, double T);

}  // namespace bermudan
