#include "quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

namespace {

double B(const HullWhite& m, double t, double T) { return (1.0 - std::exp(-m.a * (T - t))) / m.a; }

// Variance of the integrated factor over [t,T].
double V(const HullWhite& m, double t, double T) {
    const double a = m.a, tau = T - t;
    return m.sigma * m.sigma / (a * a) *
           (tau + 2.0 / a * std::exp(-a * tau) - 0.5 / a * std::exp(-2.0 * a * tau) - 1.5 / a);
}

// Drift of x between s and s + dt under the (s + dt)-forward measure.
double forward_drift(const HullWhite& m, double dt) {
    const double s2 = m.sigma * m.sigma, a = m.a;
    return s2 / (a * a) * (1.0 - std::exp(-a * dt)) - s2 / (2.0 * a * a) * (1.0 - std::exp(-2.0 * a * dt));
}

double step_sd(const HullWhite& m, double dt) {
    return std::sqrt(m.sigma * m.sigma / (2.0 * m.a) * (1.0 - std::exp(-2.0 * m.a * dt)));
}

double exercise(const HullWhite& m, bool payer, double notional, double strike, const std::vector<double>& dates,
                std::size_t k, double x) {
    double annuity = 0.0;
    for (std::size_t j = k + 1; j < dates.size(); ++j) annuity += (dates[j] - dates[j - 1]) * bond(m, dates[k], dates[j], x);
    const double receiver = notional * (strike * annuity - (1.0 - bond(m, dates[k], dates.back(), x)));
    return payer ? -receiver : receiver;
}

// E[f(Y)], Y ~ N(mu, sd^2), f given on the grid; trapezoid weights renormalised.
double expect(const std::vector<double>& grid, const std::vector<double>& f, double mu, double sd) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double z = (grid[j] - mu) / sd;
        if (std::abs(z) > 12.0) continue;
        const double w = std::exp(-0.5 * z * z) * ((j == 0 || j + 1 == grid.size()) ? 0.5 : 1.0);
        num += w * f[j];
        den += w;
    }
    return num / den;
}

}  // namespace

double bond(const HullWhite& m, double t, double T, double x) {
    return std::exp(-m.f0 * (T - t) + 0.5 * (V(m, t, T) - V(m, 0.0, T) + V(m, 0.0, t)) - B(m, t, T) * x);
}

double swap_rate(double f0, const std::vector<double>& dates) {
    double annuity = 0.0;
    for (std::size_t j = 1; j < dates.size(); ++j) annuity += (dates[j] - dates[j - 1]) * std::exp(-f0 * dates[j]);
    return (std::exp(-f0 * dates.front()) - std::exp(-f0 * dates.back())) / annuity;
}

double swaption(const HullWhite& m, bool payer, double notional, double strike, const std::vector<double>& dates,
                bool bermudan, int n) {
    const std::size_t last = bermudan ? dates.size() - 2 : 0;
    const double width = 12.0 * step_sd(m, dates[last]) + 4.0 * forward_drift(m, dates.back());
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i) grid[i] = -width + 2.0 * width * i / (n - 1);

    std::vector<double> value(n);
    for (int i = 0; i < n; ++i) value[i] = std::max(exercise(m, payer, notional, strike, dates, last, grid[i]), 0.0);
    for (std::size_t k = last; k-- > 0;) {
        const double dt = dates[k + 1] - dates[k];
        const double decay = std::exp(-m.a * dt), drift = forward_drift(m, dt), sd = step_sd(m, dt);
        std::vector<double> next(n);
        for (int i = 0; i < n; ++i) {
            const double cont =
                bond(m, dates[k], dates[k + 1], grid[i]) * expect(grid, value, grid[i] * decay - drift, sd);
            next[i] = std::max(exercise(m, payer, notional, strike, dates, k, grid[i]), cont);
        }
        value.swap(next);
    }
    const double t0 = dates.front();
    return bond(m, 0.0, t0, 0.0) * expect(grid, value, -forward_drift(m, t0), step_sd(m, t0));
}

}  // namespace oracle
