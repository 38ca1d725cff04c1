#include "bermudan/benchmarks.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "bermudan/errors.hpp"
#include "bermudan/parallel.hpp"
#include "bermudan/random.hpp"

namespace bermudan {

namespace {

void require_one_factor(const GaussianModel& model, const char* what) {
    if (model.factors() != 1) throw std::domain_error(std::string(what) + " needs a one-factor model");
}

// Root of a decreasing function on [lo, hi] by Newton steps kept inside a
// shrinking bracket. Widens the bracket once if it does not straddle zero.
double decreasing_root(const std::function<double(double, double*)>& f, double lo, double hi) {
    double dlo, dhi;
    double flo = f(lo, &dlo), fhi = f(hi, &dhi);
    if (!(flo > 0.0 && fhi < 0.0)) {
        const double w = hi - lo;
        lo -= 10.0 * w;
        hi += 10.0 * w;
        flo = f(lo, &dlo);
        fhi = f(hi, &dhi);
        if (!(flo > 0.0 && fhi < 0.0)) throw NumericError("root not bracketed");
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double df;
        const double fx = f(x, &df);
        if (fx == 0.0) return x;
        if (fx > 0.0) lo = x;
        else hi = x;
        double next = df < 0.0 ? x - fx / df : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x)) || hi - lo < 1e-16) return next;
        x = next;
    }
    return x;
}

}  // namespace

double zero_bond_call(const GaussianModel& model, double t, std::span<const double> x,
                      double expiry, double maturity, double strike) {
    const double pe = bond_price(model, t, expiry, x);
    const double pu = bond_price(model, t, maturity, x);
    const double v = bond_option_variance(model, t, expiry, maturity);
    if (!(v > 0.0)) return std::max(pu - strike * pe, 0.0);
    const double s = std::sqrt(v);
    const double dp = std::log(pu / (strike * pe)) / s + 0.5 * s;
    return pu * normal_cdf(dp) - strike * pe * normal_cdf(dp - s);
}

double zero_bond_put(const GaussianModel& model, double t, std::span<const double> x,
                     double expiry, double maturity, double strike) {
    const double pe = bond_price(model, t, expiry, x);
    const double pu = bond_price(model, t, maturity, x);
    const double v = bond_option_variance(model, t, expiry, maturity);
    if (!(v > 0.0)) return std::max(strike * pe - pu, 0.0);
    const double s = std::sqrt(v);
    const double dp = std::log(pu / (strike * pe)) / s + 0.5 * s;
    return strike * pe * normal_cdf(-(dp - s)) - pu * normal_cdf(-dp);
}

std::vector<double> coupon_amounts(const BermudanSpec& spec) {
    std::vector<double> c;
    for (std::size_t j = 1; j < spec.dates.size(); ++j) c.push_back(spec.accrual(j) * spec.strike);
    c.back() += 1.0;
    return c;
}

double jamshidian_price(const GaussianModel& model, const BermudanSpec& spec, double t, double x) {
    require_one_factor(model, "Jamshidian decomposition");
    validate(spec);
    const double T0 = spec.dates[0];
    if (t > T0) throw std::domain_error("valuation after expiry");
    const std::vector<double> c = coupon_amounts(spec);
    std::vector<BondCoeffs> bonds;
    for (std::size_t j = 1; j < spec.dates.size(); ++j) bonds.push_back(bond_coeffs(model, T0, spec.dates[j]));

    const auto f = [&](double xs, double* df) {
        double v = -1.0, dv = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) {
            const double p = std::exp(bonds[j].A - bonds[j].B[0] * xs);
            v += c[j] * p;
            dv -= c[j] * bonds[j].B[0] * p;
        }
        *df = dv;
        return v;
    };
    const double width = 10.0 * model.vol(0) * std::sqrt(std::max(T0, 1e-4));
    const double xstar = decreasing_root(f, -width, width);

    const double xs[1] = {x};
    double price = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        const double k = std::exp(bonds[j].A - bonds[j].B[0] * xstar);
        price += c[j] * (spec.payer() ? zero_bond_put(model, t, xs, T0, spec.dates[j + 1], k)
                                      : zero_bond_call(model, t, xs, T0, spec.dates[j + 1], k));
    }
    return spec.notional * price;
}

namespace {

std::size_t basis_size(LsmBasis b) { return b == LsmBasis::Quadratic1F ? 3 : 6; }

void basis_row(LsmBasis b, std::span<const double> x, const std::vector<double>& scale, double* row) {
    if (b == LsmBasis::Quadratic1F) {
        const double u = x[0] / scale[0];
        row[0] = 1.0;
        row[1] = u;
        row[2] = u * u;
        return;
    }
    const double u = x[0] / scale[0], v = x[1] / scale[1];
    row[0] = 1.0;
    row[1] = u;
    row[2] = v;
    row[3] = u * u;
    row[4] = u * v;
    row[5] = v * v;
}

struct Regression {
    Eigen::VectorXd beta;
    std::vector<double> scale;
    bool fitted = false;
};

Regression regress(LsmBasis basis, const PathSet& ps, std::size_t ti, const std::vector<double>& h,
                   const std::vector<double>& y, std::vector<std::string>& warnings) {
    const std::size_t nb = basis_size(basis);
    const std::size_t d = ps.factors;
    Regression r;
    r.scale.assign(d, 1.0);
    std::vector<std::size_t> itm;
    for (std::size_t p = 0; p < ps.n_paths; ++p)
        if (h[p] > 0.0) itm.push_back(p);
    if (itm.size() < nb) return r;
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0, s2 = 0.0;
        for (std::size_t p : itm) {
            const double v = ps.state(p, ti)[i];
            s += v;
            s2 += v * v;
        }
        const double n = static_cast<double>(itm.size());
        const double sd = std::sqrt(std::max(s2 / n - (s / n) * (s / n), 0.0));
        if (sd > 0.0) r.scale[i] = sd;
    }
    Eigen::MatrixXd X(static_cast<Eigen::Index>(itm.size()), static_cast<Eigen::Index>(nb));
    Eigen::VectorXd Y(static_cast<Eigen::Index>(itm.size()));
    std::vector<double> row(nb);
    for (std::size_t k = 0; k < itm.size(); ++k) {
        basis_row(basis, ps.state(itm[k], ti), r.scale, row.data());
        for (std::size_t c = 0; c < nb; ++c) X(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = row[c];
        Y(static_cast<Eigen::Index>(k)) = y[itm[k]];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < static_cast<Eigen::Index>(nb)) {
        warnings.push_back("singular LSM regression at t=" + std::to_string(ps.grid[ti]) +
                           "; using ridge 1e-10");
        const Eigen::MatrixXd G = X.transpose() * X +
                                  1e-10 * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(nb),
                                                                    static_cast<Eigen::Index>(nb));
        r.beta = G.ldlt().solve(X.transpose() * Y);
    } else {
        r.beta = qr.solve(Y);
    }
    r.fitted = true;
    return r;
}

double fitted(LsmBasis basis, const Regression& r, std::span<const double> x) {
    double row[6];
    basis_row(basis, x, r.scale, row);
    double v = 0.0;
    for (Eigen::Index c = 0; c < r.beta.size(); ++c) v += r.beta(c) * row[c];
    return v;
}

}  // namespace

LsmResult lsm_price(const GaussianModel& model, const BermudanSpec& spec, const LsmOptions& opts) {
    validate(spec);
    LsmBasis basis = opts.basis;
    if (basis == LsmBasis::Auto)
        basis = model.factors() == 1 ? LsmBasis::Quadratic1F : LsmBasis::Quadratic2F;
    if ((basis == LsmBasis::Quadratic1F) != (model.factors() == 1) || model.factors() > 2)
        throw ContractError("LSM basis does not match the model dimension");
    if (opts.n_runs == 0 || opts.n_paths < 10) throw std::invalid_argument("LSM needs runs and paths");

    const std::size_t K = spec.exercise_count();
    const double TM = spec.maturity();
    const double p0 = std::exp(-model.f0() * TM);
    std::vector<double> dates(spec.dates.begin(), spec.dates.begin() + static_cast<std::ptrdiff_t>(K));
    std::vector<ExercisePayoff> payoff;
    for (std::size_t m = 0; m < K; ++m) payoff.emplace_back(model, spec, m);

    LsmResult res;
    for (std::size_t r = 0; r < opts.n_runs; ++r) {
        const std::uint64_t run_seed = derive_seed(opts.seed, 300 + r);
        const PathSet ps = simulate_observed(model, dates, opts.dt, opts.n_paths, Measure::ForwardTM,
                                             run_seed, TM);
        const std::size_t N = ps.n_paths;
        std::vector<std::size_t> ti(K);
        for (std::size_t m = 0; m < K; ++m) ti[m] = ps.time_index(dates[m]);

        // deflated cash flow of the current policy
        std::vector<double> cf(N), h(N);
        for (std::size_t p = 0; p < N; ++p) {
            const double v = payoff[K - 1](ps.state(p, ti[K - 1]));
            cf[p] = std::max(v, 0.0) / ps.numeraire_at(p, ti[K - 1]);
        }
        std::vector<Regression> policy(K);
        for (std::size_t m = K - 1; m-- > 0;) {
            for (std::size_t p = 0; p < N; ++p) h[p] = payoff[m](ps.state(p, ti[m])) / ps.numeraire_at(p, ti[m]);
            policy[m] = regress(basis, ps, ti[m], h, cf, res.warnings);
            if (!policy[m].fitted) continue;
            for (std::size_t p = 0; p < N; ++p)
                if (h[p] > 0.0 && h[p] >= fitted(basis, policy[m], ps.state(p, ti[m]))) cf[p] = h[p];
        }

        double estimate;
        if (!opts.out_of_sample) {
            estimate = p0 * mean(cf);
        } else {
            const PathSet fresh = simulate_observed(model, dates, opts.dt, opts.n_paths,
                                                    Measure::ForwardTM, derive_seed(run_seed, 1), TM);
            std::vector<double> value(N, 0.0);
            for (std::size_t p = 0; p < N; ++p) {
                for (std::size_t m = 0; m < K; ++m) {
                    const auto x = fresh.state(p, ti[m]);
                    const double hv = payoff[m](x) / fresh.numeraire_at(p, ti[m]);
                    if (hv <= 0.0) continue;
                    if (m + 1 == K || !policy[m].fitted || hv >= fitted(basis, policy[m], x)) {
                        value[p] = hv;
                        break;
                    }
                }
            }
            estimate = p0 * mean(value);
        }
        res.runs.push_back(estimate);
    }
    if (res.runs.size() == 1) {
        res.price.value = res.runs[0];
        res.price.se = 0.0;
    } else {
        res.price = mean_se(res.runs);
    }
    res.ci_low = res.price.value - 1.96 * res.price.se;
    res.ci_high = res.price.value + 1.96 * res.price.se;
    return res;
}

HwSwaptionAnalytics::HwSwaptionAnalytics(const GaussianModel& model, const BermudanSpec& spec,
                                         double t)
    : payer_(spec.payer()) {
    require_one_factor(model, "Hull-White swaption delta");
    validate(spec);
    const double T0 = spec.dates[0];
    if (!(t < T0)) throw std::domain_error("delta requires t < T_0");
    const double a = model.mean_reversion(0);
    coupons_ = coupon_amounts(spec);
    bond0_ = bond_coeffs(model, t, T0);
    nu0_ = model.vol(0) * decay_integral(a, T0 - t);
    for (std::size_t j = 1; j < spec.dates.size(); ++j) {
        bonds_.push_back(bond_coeffs(model, t, spec.dates[j]));
        alpha_.push_back(std::sqrt(bond_option_variance(model, t, T0, spec.dates[j])));
        nu_.push_back(model.vol(0) * decay_integral(a, spec.dates[j] - t));
    }
}

HenrardTerms HwSwaptionAnalytics::terms(double x) const {
    const double xs[1] = {x};
    HenrardTerms h;
    h.coupons = coupons_;
    h.alpha = alpha_;
    h.bond0 = bond0_.price(xs);
    for (const auto& b : bonds_) h.bonds.push_back(b.price(xs));
    const auto f = [&](double k, double* df) {
        double v = -1.0, dv = 0.0;
        for (std::size_t j = 0; j < h.bonds.size(); ++j) {
            const double a = h.alpha[j];
            const double e = h.coupons[j] * h.bonds[j] / h.bond0 * std::exp(-0.5 * a * a - a * k);
            v += e;
            dv -= a * e;
        }
        *df = dv;
        return v;
    };
    // Beyond |kappa| = 40 the normal CDFs saturate, so an unbracketed root
    // (close to expiry) is clamped there.
    constexpr double kLimit = 40.0;
    double dummy;
    if (f(kLimit, &dummy) >= 0.0) h.kappa = kLimit;
    else if (f(-kLimit, &dummy) <= 0.0) h.kappa = -kLimit;
    else h.kappa = decreasing_root(f, -kLimit, kLimit);
    h.residual = f(h.kappa, &dummy);
    return h;
}

double HwSwaptionAnalytics::receiver_value(double x) const {
    const HenrardTerms h = terms(x);
    double v = -h.bond0 * normal_cdf(h.kappa);
    for (std::size_t j = 0; j < h.bonds.size(); ++j)
        v += h.coupons[j] * h.bonds[j] * normal_cdf(h.kappa + h.alpha[j]);
    return v;
}

double HwSwaptionAnalytics::delta(double x) const {
    const HenrardTerms h = terms(x);
    double num = -h.bond0 * nu0_ * normal_cdf(h.kappa);
    double den = -h.bond0 * nu0_;
    for (std::size_t j = 0; j < h.bonds.size(); ++j) {
        const double w = h.coupons[j] * h.bonds[j] * nu_[j];
        num += w * normal_cdf(h.kappa + h.alpha[j]);
        den += w;
    }
    const double receiver = num / den;
    return payer_ ? receiver - 1.0 : receiver;
}

HenrardTerms henrard_terms(const GaussianModel& model, const BermudanSpec& spec, double t, double x) {
    return HwSwaptionAnalytics(model, spec, t).terms(x);
}

double hw_receiver_swaption(const GaussianModel& model, const BermudanSpec& spec, double t, double x) {
    return HwSwaptionAnalytics(model, spec, t).receiver_value(x);
}

double hw_swaption_delta(const GaussianModel& model, const BermudanSpec& spec, double t, double x) {
    return HwSwaptionAnalytics(model, spec, t).delta(x);
}

Estimate mc_european_price(const GaussianModel& model, const BermudanSpec& spec,
                           std::size_t n_paths, std::uint64_t seed, double dt) {
    validate(spec);
    const double T0 = spec.dates[0];
    const double TM = spec.maturity();
    const double t0[1] = {T0};
    const PathSet ps = simulate_observed(model, t0, dt, n_paths, Measure::ForwardTM, seed, TM);
    const std::size_t ti = ps.time_index(T0);
    const ExercisePayoff h(model, spec, 0);
    const double p0 = std::exp(-model.f0() * TM);
    std::vector<double> v(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p)
        v[p] = p0 * std::max(h(ps.state(p, ti)), 0.0) / ps.numeraire_at(p, ti);
    return mean_se(v);
}

}  // namespace bermudan
