#include "bermudan/hedging.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "bermudan/benchmarks.hpp"
#include "bermudan/parallel.hpp"
#include "bermudan/stats.hpp"

namespace bermudan {

namespace {

constexpr double kBp = 1e4;

std::vector<double> monitor_dates(const BermudanSpec& spec) {
    return {spec.dates.begin(), spec.dates.begin() + static_cast<std::ptrdiff_t>(spec.exercise_count())};
}

}  // namespace

void summarize(HedgeErrorReport& rep) {
    rep.n_paths = rep.errors.size();
    if (rep.errors.empty()) return;
    rep.mean = mean(rep.errors);
    rep.sd = sample_sd(rep.errors);
    rep.p95 = quantile(rep.errors, 0.95);
    std::vector<double> abs_err(rep.errors.size());
    std::transform(rep.errors.begin(), rep.errors.end(), abs_err.begin(),
                   [](double e) { return std::abs(e); });
    rep.p95_abs = quantile(std::move(abs_err), 0.95);
}

HedgeErrorReport static_hedge_error(const HedgeSet& hedge, const GaussianModel& model,
                                    std::size_t n_paths, std::uint64_t seed, double dt) {
    if (hedge.dates() == 0) throw std::invalid_argument("empty hedge");
    const BermudanSpec& spec = hedge.spec;
    const double T0 = spec.dates[0];
    const double t0[1] = {T0};
    const PathSet ps = simulate_observed(model, t0, dt, n_paths, Measure::RiskNeutral, seed);
    const std::size_t ti = ps.time_index(T0);
    const PortfolioPricer g0(model, hedge.networks[0], hedge.inputs[0], T0);
    const ExercisePayoff h(model, spec, 0);

    HedgeErrorReport rep;
    rep.strategy = "static";
    rep.seed = seed;
    rep.errors.resize(n_paths);
    parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            const auto x = ps.state(p, ti);
            rep.errors[p] = (g0.value(x) - std::max(h(x), 0.0)) / spec.notional * kBp;
        }
    });
    summarize(rep);
    return rep;
}

HedgeErrorReport dynamic_hedge_error(const GaussianModel& model, const BermudanSpec& spec,
                                     std::size_t rebalances, std::size_t n_paths,
                                     std::uint64_t seed) {
    if (model.factors() != 1) throw std::domain_error("dynamic delta hedge needs a one-factor model");
    if (rebalances == 0) throw std::invalid_argument("need at least one rebalance");
    validate(spec);
    const double T0 = spec.dates[0];
    const double N = spec.notional;
    std::vector<double> grid(rebalances + 1);
    for (std::size_t i = 0; i <= rebalances; ++i)
        grid[i] = T0 * static_cast<double>(i) / static_cast<double>(rebalances);
    grid.back() = T0;
    const PathGenerator gen(model, grid, Measure::RiskNeutral, seed);

    std::vector<HwSwaptionAnalytics> analytics;
    // receiver forward swap sum c_j P(t,T_j) - P(t,T_0)
    std::vector<std::vector<BondCoeffs>> swap_bonds(rebalances + 1);
    const std::vector<double> coupons = coupon_amounts(spec);
    for (std::size_t i = 0; i <= rebalances; ++i) {
        if (i < rebalances) analytics.emplace_back(model, spec, grid[i]);
        for (std::size_t j = 0; j < spec.dates.size(); ++j)
            swap_bonds[i].push_back(bond_coeffs(model, grid[i], spec.dates[j]));
    }
    const auto swap_value = [&](std::size_t i, std::span<const double> x) {
        double v = -swap_bonds[i][0].price(x);
        for (std::size_t j = 1; j < spec.dates.size(); ++j) v += coupons[j - 1] * swap_bonds[i][j].price(x);
        return v;
    };
    const double premium = jamshidian_price(model, spec);
    const ExercisePayoff h(model, spec, 0);

    HedgeErrorReport rep;
    rep.strategy = "dynamic";
    rep.seed = seed;
    rep.errors.resize(n_paths);
    parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            double units = 0.0, cash = 0.0, bank_prev = 1.0, value = premium;
            gen.generate(p, [&](std::size_t i, std::span<const double> x, double bank) {
                const double sw = swap_value(i, x);
                if (i > 0) value = units * sw + cash * bank / bank_prev;
                if (i < rebalances) {
                    units = N * analytics[i].delta(x[0]);
                    cash = value - units * sw;
                    bank_prev = bank;
                } else {
                    rep.errors[p] = (value - std::max(h(x), 0.0)) / N * kBp;
                }
            });
        }
    });
    summarize(rep);
    return rep;
}

HedgeErrorReport semistatic_bermudan_hedge_error(const HedgeSet& hedge, const GaussianModel& model,
                                                 std::size_t n_paths, std::uint64_t seed,
                                                 bool discounted, double dt) {
    const BermudanSpec& spec = hedge.spec;
    const std::size_t K = hedge.dates();
    if (K == 0) throw std::invalid_argument("empty hedge");
    const std::vector<double> dates = monitor_dates(spec);
    const PathSet ps = simulate_observed(model, dates, dt, n_paths, Measure::RiskNeutral, seed);

    std::vector<ExercisePayoff> payoff;
    std::vector<PortfolioPricer> at_expiry;
    std::vector<std::optional<PortfolioPricer>> continuation;
    std::vector<std::size_t> ti;
    for (std::size_t m = 0; m < K; ++m) {
        payoff.emplace_back(model, spec, m);
        at_expiry.emplace_back(model, hedge.networks[m], hedge.inputs[m], dates[m]);
        continuation.emplace_back();
        if (m + 1 < K) continuation[m].emplace(model, hedge.networks[m + 1], hedge.inputs[m + 1], dates[m]);
        ti.push_back(ps.time_index(dates[m]));
    }

    HedgeErrorReport rep;
    rep.strategy = discounted ? "semistatic_discounted" : "semistatic";
    rep.seed = seed;
    rep.errors.resize(n_paths);
    parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            double he = 0.0;
            for (std::size_t m = 0; m < K; ++m) {
                const auto x = ps.state(p, ti[m]);
                const double h = payoff[m](x);
                const double c = continuation[m] ? continuation[m]->value(x) : 0.0;
                const double inc = at_expiry[m].value(x) - std::max(c, h);
                he += discounted ? inc / ps.numeraire_at(p, ti[m]) : inc;
                if (h > 0.0 && c <= h) break;
            }
            rep.errors[p] = he / spec.notional * kBp;
        }
    });
    summarize(rep);
    return rep;
}

void write_hedge_summary_csv(std::ostream& out, const std::vector<HedgeErrorReport>& reports,
                             const std::vector<double>& moneyness) {
    const auto old = out.precision(10);
    out << "strategy,moneyness,n_paths,mean_bp,sd_bp,p95_bp,p95_abs_bp\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        out << r.strategy << ',' << (i < moneyness.size() ? moneyness[i] : 0.0) << ',' << r.n_paths
            << ',' << r.mean << ',' << r.sd << ',' << r.p95 << ',' << r.p95_abs << '\n';
    }
    out.precision(old);
}

void write_hedge_errors_csv(std::ostream& out, const HedgeErrorReport& rep) {
    const auto old = out.precision(17);
    out << "path,error_bp\n";
    for (std::size_t p = 0; p < rep.errors.size(); ++p) out << p << ',' << rep.errors[p] << '\n';
    out.precision(old);
}

}  // namespace bermudan
