#include "bermudan/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "bermudan/errors.hpp"
#include "bermudan/parallel.hpp"
#include "bermudan/random.hpp"

namespace bermudan {

std::uint64_t bound_run_seed(std::uint64_t seed, std::size_t run) {
    return derive_seed(derive_seed(seed, 0xb0b0), run);
}

BoundRun bound_run(const HedgeSet& hedge, const GaussianModel& model, std::size_t n_paths,
                   Measure measure, std::uint64_t seed, double dt) {
    if (n_paths < 2) throw std::invalid_argument("bounds need at least two paths");
    const BermudanSpec& spec = hedge.spec;
    const std::size_t K = hedge.dates();
    if (K == 0 || hedge.inputs.size() != K) throw ContractError("hedge has no networks attached");
    const double TM = spec.maturity();
    std::vector<double> dates(spec.dates.begin(), spec.dates.begin() + static_cast<std::ptrdiff_t>(K));

    const std::vector<double> grid = build_time_grid(dates, dt);
    std::vector<std::size_t> date_step(grid.size(), K);
    for (std::size_t m = 0; m < K; ++m) {
        auto it = std::lower_bound(grid.begin(), grid.end(), dates[m]);
        date_step[static_cast<std::size_t>(it - grid.begin())] = m;
    }
    const PathGenerator gen(model, grid, measure, seed, TM);

    std::vector<ExercisePayoff> payoff;
    std::vector<PortfolioPricer> at_expiry;    // G_m at T_m
    std::vector<std::optional<PortfolioPricer>> continuation;  // G_{m+1} at T_m
    for (std::size_t m = 0; m < K; ++m) {
        payoff.emplace_back(model, spec, m);
        at_expiry.emplace_back(model, hedge.networks[m], hedge.inputs[m], dates[m]);
        continuation.emplace_back();
        if (m + 1 < K) continuation[m].emplace(model, hedge.networks[m + 1], hedge.inputs[m + 1], dates[m]);
    }

    std::vector<double> lower(n_paths), upper(n_paths), exercised(n_paths);
    std::vector<std::vector<double>> incr(K, std::vector<double>(n_paths));

    parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
        std::vector<double> x(K * model.factors());
        std::vector<double> num(K);
        double num0 = 1.0;
        for (std::size_t p = begin; p < end; ++p) {
            gen.generate(p, [&](std::size_t step, std::span<const double> xs, double n) {
                if (step == 0) num0 = n;
                const std::size_t m = date_step[step];
                if (m == K) return;
                std::copy(xs.begin(), xs.end(), x.begin() + static_cast<std::ptrdiff_t>(m * xs.size()));
                num[m] = n;
            });
            const std::size_t d = model.factors();
            bool stopped = false;
            double low = 0.0;
            double mart = 0.0;  // M_{T_m} - M_0
            double prev = hedge.direct_estimate / num0;
            double best = -1e300;
            for (std::size_t m = 0; m < K; ++m) {
                const std::span<const double> xm(x.data() + m * d, d);
                const double h = payoff[m](xm);
                const double g = at_expiry[m].value(xm) / num[m];
                const double c = continuation[m] ? continuation[m]->value(xm) : 0.0;
                incr[m][p] = g - prev;
                mart += g - prev;
                prev = c / num[m];
                best = std::max(best, std::max(h, 0.0) / num[m] - mart);
                if (!stopped && h > 0.0 && c <= h) {
                    stopped = true;
                    low = h / num[m];
                }
            }
            lower[p] = num0 * low;
            upper[p] = num0 * best;
            exercised[p] = stopped ? 1.0 : 0.0;
        }
    });

    BoundRun run;
    run.lower = mean_se(lower);
    run.upper = mean_se(upper);
    for (std::size_t m = 0; m < K; ++m) run.increments.push_back(mean_se(incr[m]));
    run.exercise_rate = mean(exercised);
    return run;
}

BoundReport estimate_bounds(const HedgeSet& hedge, const GaussianModel& model,
                            const BoundOptions& opts) {
    if (opts.n_runs == 0) throw std::invalid_argument("need at least one bound run");
    BoundReport rep;
    rep.n_paths = opts.n_paths;
    rep.n_runs = opts.n_runs;
    rep.measure = opts.measure;
    rep.seed = opts.seed;
    std::vector<double> lo, up;
    for (std::size_t r = 0; r < opts.n_runs; ++r) {
        rep.runs.push_back(
            bound_run(hedge, model, opts.n_paths, opts.measure, bound_run_seed(opts.seed, r), opts.dt));
        lo.push_back(rep.runs.back().lower.value);
        up.push_back(rep.runs.back().upper.value);
    }
    if (opts.n_runs == 1) {
        rep.lower = rep.runs[0].lower;
        rep.upper = rep.runs[0].upper;
    } else {
        rep.lower = mean_se(lo);
        rep.upper = mean_se(up);
    }
    return rep;
}

}  // namespace bermudan
