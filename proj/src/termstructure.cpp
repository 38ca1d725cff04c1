#include "bermudan/termstructure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bermudan {

namespace {

void require_ordered(double t, double T, const char* what) {
    if (!(t <= T)) {
        throw std::domain_error(std::string(what) + ": requires t <= T (t=" + std::to_string(t) +
                                ", T=" + std::to_string(T) + ")");
    }
}

// int_0^tau B_i(s) B_j(s) ds with B_k(s) = (1 - exp(-a_k s)) / a_k
double product_integral(double ai, double aj, double tau) {
    return (tau - decay_integral(ai, tau) - decay_integral(aj, tau) +
            decay_integral(ai + aj, tau)) /
           (ai * aj);
}

}  // namespace

double decay_integral(double a, double tau) {
    // -expm1 keeps full precision for small a*tau
    return -std::expm1(-a * tau) / a;
}

GaussianModel::GaussianModel(std::vector<double> mean_reversion, std::vector<double> vol,
                             std::vector<double> correlation, double f0)
    : a_(std::move(mean_reversion)), vol_(std::move(vol)), corr_(std::move(correlation)),
      f0_(f0) {
    const std::size_t d = a_.size();
    if (d == 0) throw std::invalid_argument("model: at least one factor is required");
    if (vol_.size() != d) throw std::invalid_argument("model: vol size differs from factor count");
    if (corr_.size() != d * d)
        throw std::invalid_argument("model: correlation must be a d x d matrix");
    if (!std::isfinite(f0_)) throw std::invalid_argument("model: f0 must be finite");
    for (std::size_t i = 0; i < d; ++i) {
        if (!(a_[i] > 0.0)) throw std::invalid_argument("model: mean reversion must be > 0");
        if (!(vol_[i] > 0.0)) throw std::invalid_argument("model: volatility must be > 0");
        if (std::abs(corr_[i * d + i] - 1.0) > 1e-12)
            throw std::invalid_argument("model: correlation diagonal must be 1");
        for (std::size_t j = 0; j < i; ++j) {
            if (std::abs(corr_[i * d + j] - corr_[j * d + i]) > 1e-12)
                throw std::invalid_argument("model: correlation must be symmetric");
        }
    }
    // Cholesky; a zero pivot is allowed (PSD) as long as the rest of the
    // column is zero too.
    chol_.assign(d * d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double diag = corr_[j * d + j];
        for (std::size_t k = 0; k < j; ++k) diag -= chol_[j * d + k] * chol_[j * d + k];
        if (diag < -1e-12) throw std::invalid_argument("model: correlation is not PSD");
        const double ljj = std::sqrt(std::max(diag, 0.0));
        chol_[j * d + j] = ljj;
        for (std::size_t i = j + 1; i < d; ++i) {
            double s = corr_[i * d + j];
            for (std::size_t k = 0; k < j; ++k) s -= chol_[i * d + k] * chol_[j * d + k];
            if (ljj > 1e-14) {
                chol_[i * d + j] = s / ljj;
            } else if (std::abs(s) > 1e-12) {
                throw std::invalid_argument("model: correlation is not PSD");
            }
        }
    }
}

GaussianModel GaussianModel::hull_white(double a, double sigma, double f0) {
    return GaussianModel({a}, {sigma}, {1.0}, f0);
}

GaussianModel GaussianModel::g2pp(double a1, double a2, double sigma1, double sigma2,
                                  double rho, double f0) {
    return GaussianModel({a1, a2}, {sigma1, sigma2}, {1.0, rho, rho, 1.0}, f0);
}

GaussianModel GaussianModel::from_vol_matrix(std::vector<double> mean_reversion,
                                             std::vector<double> vol_matrix, double f0) {
    const std::size_t d = mean_reversion.size();
    if (vol_matrix.size() != d * d)
        throw std::invalid_argument("model: volatility matrix must be d x d");
    std::vector<double> vol(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += vol_matrix[i * d + k] * vol_matrix[i * d + k];
        vol[i] = std::sqrt(s);
        if (!(vol[i] > 0.0)) throw std::invalid_argument("model: volatility row has zero norm");
    }
    std::vector<double> corr(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += vol_matrix[i * d + k] * vol_matrix[j * d + k];
            corr[i * d + j] = (i == j) ? 1.0 : s / (vol[i] * vol[j]);
        }
    }
    return GaussianModel(std::move(mean_reversion), std::move(vol), std::move(corr), f0);
}

double BondCoeffs::price(std::span<const double> x) const {
    double e = A;
    for (std::size_t i = 0; i < B.size(); ++i) e -= B[i] * x[i];
    return std::exp(e);
}

double integrated_variance(const GaussianModel& model, double t, double T) {
    require_ordered(t, T, "integrated_variance");
    const double tau = T - t;
    const std::size_t d = model.factors();
    double v = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            v += model.covariation(i, j) *
                 product_integral(model.mean_reversion(i), model.mean_reversion(j), tau);
    return v;
}

BondCoeffs bond_coeffs(const GaussianModel& model, double t, double T) {
    require_ordered(t, T, "bond_coeffs");
    if (!(t >= 0.0)) throw std::domain_error("bond_coeffs: requires t >= 0");
    BondCoeffs c;
    c.B.resize(model.factors());
    if (t == T) {
        return c;
    }
    for (std::size_t i = 0; i < model.factors(); ++i)
        c.B[i] = decay_integral(model.mean_reversion(i), T - t);
    c.A = -model.f0() * (T - t) +
          0.5 * (integrated_variance(model, t, T) - integrated_variance(model, 0.0, T) +
                 integrated_variance(model, 0.0, t));
    return c;
}

double bond_price(const GaussianModel& model, double t, double T, std::span<const double> x) {
    if (x.size() != model.factors())
        throw std::invalid_argument("bond_price: state dimension mismatch");
    for (double xi : x)
        if (!std::isfinite(xi)) throw std::domain_error("bond_price: non-finite factor state");
    return bond_coeffs(model, t, T).price(x);
}

std::vector<double> bond_volatility(const GaussianModel& model, double t, double T) {
    require_ordered(t, T, "bond_volatility");
    const std::size_t d = model.factors();
    std::vector<double> nu(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        const double b = decay_integral(model.mean_reversion(i), T - t);
        for (std::size_t k = 0; k < d; ++k) nu[k] += b * model.vol_matrix(i, k);
    }
    return nu;
}

double short_rate_shift(const GaussianModel& model, double t) {
    const std::size_t d = model.factors();
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            s += model.covariation(i, j) * decay_integral(model.mean_reversion(i), t) *
                 decay_integral(model.mean_reversion(j), t);
    return model.f0() + 0.5 * s;
}

double short_rate(const GaussianModel& model, double t, std::span<const double> x) {
    double r = short_rate_shift(model, t);
    for (double xi : x) r += xi;
    return r;
}

double bond_option_variance(const GaussianModel& model, double t, double expiry,
                            double maturity) {
    require_ordered(t, expiry, "bond_option_variance");
    require_ordered(expiry, maturity, "bond_option_variance");
    const std::size_t d = model.factors();
    const double tau = expiry - t;
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double ai = model.mean_reversion(i);
        const double gi = decay_integral(ai, maturity - expiry);
        for (std::size_t j = 0; j < d; ++j) {
            const double aj = model.mean_reversion(j);
            const double gj = decay_integral(aj, maturity - expiry);
            s += model.covariation(i, j) * gi * gj * decay_integral(ai + aj, tau);
        }
    }
    return s;
}

std::vector<double> forward_drift_adjustment(const GaussianModel& model, double t, double Tm) {
    require_ordered(t, Tm, "forward_drift_adjustment");
    const std::size_t d = model.factors();
    const double tau = Tm - t;
    std::vector<double> theta(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        const double ai = model.mean_reversion(i);
        for (std::size_t j = 0; j < d; ++j) {
            const double aj = model.mean_reversion(j);
            theta[i] += model.covariation(i, j) / aj *
                        (decay_integral(ai, tau) - decay_integral(ai + aj, tau));
        }
    }
    return theta;
}

std::vector<double> factor_covariance(const GaussianModel& model, double t, double T) {
    require_ordered(t, T, "factor_covariance");
    const std::size_t d = model.factors();
    std::vector<double> c(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            c[i * d + j] =
                model.covariation(i, j) *
                decay_integral(model.mean_reversion(i) + model.mean_reversion(j), T - t);
    return c;
}

GaussianMoments forward_measure_moments(const GaussianModel& model, double t, double Tm,
                                        std::span<const double> x_t) {
    require_ordered(t, Tm, "forward_measure_moments");
    const std::size_t d = model.factors();
    if (x_t.size() != d) throw std::invalid_argument("forward_measure_moments: state mismatch");
    GaussianMoments m;
    const auto theta = forward_drift_adjustment(model, t, Tm);
    m.mean.resize(d);
    for (std::size_t i = 0; i < d; ++i)
        m.mean[i] = x_t[i] * std::exp(-model.mean_reversion(i) * (Tm - t)) - theta[i];
    m.cov = factor_covariance(model, t, Tm);
    return m;
}

}  // namespace bermudan
