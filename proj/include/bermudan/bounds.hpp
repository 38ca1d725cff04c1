#pragma once
// Lower bound from the network stopping rule and duality upper bound from a
// martingale built out of closed-form portfolio values. Both are estimated in
// one pass on fresh paths; no nested simulation.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bermudan/engine.hpp"
#include "bermudan/stats.hpp"

namespace bermudan {

struct BoundOptions {
    std::size_t n_paths = 200000;
    std::size_t n_runs = 10;
    std::uint64_t seed = 7;
    Measure measure = Measure::ForwardTM;
    double dt = 1.0 / 52.0;
};

/// One Monte Carlo run.
struct BoundRun {
    Estimate lower;
    Estimate upper;
    /// Per-date mean and SE of the deflated martingale increments
    /// G_m/N(T_m) - C_{m-1}/N(T_{m-1}), m = 0..K-1 (C_{-1} = direct).
    std::vector<Estimate> increments;
    double exercise_rate = 0.0;  // fraction of paths exercised at some date
};

struct BoundReport {
    Estimate lower;  // mean over runs, SE = sd(runs)/sqrt(runs)
    Estimate upper;
    std::vector<BoundRun> runs;
    std::size_t n_paths = 0;
    std::size_t n_runs = 0;
    Measure measure = Measure::ForwardTM;
    std::uint64_t seed = 0;
};

/// Seed of run r, disjoint from the training streams.
std::uint64_t bound_run_seed(std::uint64_t seed, std::size_t run);

BoundRun bound_run(const HedgeSet& hedge, const GaussianModel& model, std::size_t n_paths,
                   Measure measure, std::uint64_t seed, double dt = 1.0 / 52.0);

BoundReport estimate_bounds(const HedgeSet& hedge, const GaussianModel& model,
                            const BoundOptions& opts);

}  // namespace bermudan
