#pragma once
// Exact Gaussian paths of the factor process under the risk-neutral measure (bank
// account numeraire, trapezoidal accrual) or under the T-forward measure
// (numeraire P(t,T), available in closed form).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bermudan/random.hpp"
#include "bermudan/termstructure.hpp"

namespace bermudan {

enum class Measure { RiskNeutral, ForwardTM };

const char* to_string(Measure m);
Measure measure_from_string(const std::string& s);

/// Strictly increasing grid from 0 that contains every key time, with equal
/// sub-steps of length at most dt between consecutive key times.
std::vector<double> build_time_grid(std::span<const double> key_times, double dt);

/// Generates individual paths on demand. Path n always uses the random
/// stream (seed, n), whatever order or thread it is produced on.
class PathGenerator {
public:
    /// forward_maturity is the numeraire bond maturity under ForwardTM and is
    /// ignored under RiskNeutral.
    PathGenerator(const GaussianModel& model, std::vector<double> grid, Measure measure,
                  std::uint64_t seed, double forward_maturity = 0.0);

    const std::vector<double>& grid() const { return grid_; }
    Measure measure() const { return measure_; }
    double forward_maturity() const { return forward_maturity_; }
    const GaussianModel& model() const { return *model_; }

    /// Calls visit(step, x, numeraire) at every grid point of path `index`,
    /// step 0 included. x is only valid during the call.
    template <class Visitor>
    void generate(std::size_t index, Visitor&& visit) const;

private:
    const GaussianModel* model_;
    std::vector<double> grid_;
    Measure measure_;
    std::uint64_t seed_;
    double forward_maturity_;
    std::size_t d_;
    // per step n (from grid[n] to grid[n+1])
    // exact Gaussian transition from grid[n] to grid[n+1]
    std::vector<double> dt_;
    std::vector<double> decay_;       // exp(-a_i dt), steps x d
    std::vector<double> mean_shift_;  // forward-measure drift integral, steps x d
    std::vector<double> chol_;        // step covariance factor, steps x d x d (lower)
    std::vector<double> shift_;       // phi at each grid point
    std::vector<BondCoeffs> forward_bond_;           // P(t_n, T) for ForwardTM
};

/// Stored trajectories. paths is laid out [path][time][factor].
struct PathSet {
    Measure measure = Measure::RiskNeutral;
    std::vector<double> grid;
    std::size_t n_paths = 0;
    std::size_t factors = 0;
    std::vector<double> paths;
    std::vector<double> numeraire;  // [path][time]
    std::uint64_t seed = 0;
    double forward_maturity = 0.0;

    std::size_t n_times() const { return grid.size(); }
    std::span<const double> state(std::size_t path, std::size_t time) const {
        return {paths.data() + (path * n_times() + time) * factors, factors};
    }
    double numeraire_at(std::size_t path, std::size_t time) const {
        return numeraire[path * n_times() + time];
    }
    /// Index of a grid time, or throws std::out_of_range.
    std::size_t time_index(double t) const;
};

/// Simulates and stores every point of `grid`.
PathSet simulate(const GaussianModel& model, std::span<const double> grid, std::size_t n_paths,
                 Measure measure, std::uint64_t seed, double forward_maturity = 0.0);

/// Steps on build_time_grid(observe, dt) but stores only t = 0 and the
/// observation times.
PathSet simulate_observed(const GaussianModel& model, std::span<const double> observe, double dt,
                          std::size_t n_paths, Measure measure, std::uint64_t seed,
                          double forward_maturity = 0.0);

/// Recomputes the trapezoidal bank account over the stored grid.
/// Throws std::logic_error on a forward-measure set.
PathSet accrue_numeraire(const GaussianModel& model, PathSet pathset);

/// Binary dump: "BHPS", u32 version, u32 factors, u64 paths, u64 times,
/// u32 measure, u64 seed, f64 forward maturity, then grid, paths and
/// numeraire as little-endian doubles.
void write_pathset(const std::filesystem::path& file, const PathSet& ps);
PathSet read_pathset(const std::filesystem::path& file);

// ---------------------------------------------------------------------------

template <class Visitor>
void PathGenerator::generate(std::size_t index, Visitor&& visit) const {
    Xoshiro256 rng(seed_, index);
    constexpr std::size_t kMaxFactors = 8;
    double x[kMaxFactors] = {};
    double z[kMaxFactors];
    double log_bank = 0.0;
    double rate_prev = shift_[0];
    const std::size_t steps = grid_.size() - 1;

    auto numeraire = [&](std::size_t n) {
        if (measure_ == Measure::RiskNeutral) return std::exp(log_bank);
        return forward_bond_[n].price(std::span<const double>(x, d_));
    };

    visit(std::size_t{0}, std::span<const double>(x, d_), numeraire(0));
    for (std::size_t n = 0; n < steps; ++n) {
        for (std::size_t k = 0; k < d_; ++k) z[k] = rng.normal();
        const double dt = dt_[n];
        const double* L = chol_.data() + n * d_ * d_;
        for (std::size_t i = 0; i < d_; ++i) {
            double shock = 0.0;
            for (std::size_t k = 0; k <= i; ++k) shock += L[i * d_ + k] * z[k];
            x[i] = x[i] * decay_[n * d_ + i] + mean_shift_[n * d_ + i] + shock;
        }
        double rate = shift_[n + 1];
        for (std::size_t i = 0; i < d_; ++i) rate += x[i];
        log_bank += 0.5 * (rate_prev + rate) * dt;
        rate_prev = rate;
        visit(n + 1, std::span<const double>(x, d_), numeraire(n + 1));
    }
}

}  // namespace bermudan
