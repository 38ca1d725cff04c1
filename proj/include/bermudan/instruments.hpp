#pragma once
// Swap analytics and swaption contracts on a single curve with coinciding
// fixing and payment schedules.
//
// Dates T_0 < T_1 < ... < T_M. Exercise at T_m enters the swap paying at
// T_{m+1}..T_M, worth h_m = delta N A_{m,M}(T_m) (S_{m,M}(T_m) - K).

#include <cstddef>
#include <span>
#include <vector>

#include "bermudan/termstructure.hpp"

namespace bermudan {

enum class ExerciseStyle { European, Bermudan };

struct BermudanSpec {
    double notional = 100.0;
    int direction = -1;  // +1 payer, -1 receiver
    double strike = 0.03;
    std::vector<double> dates;  // T_0 .. T_M
    ExerciseStyle style = ExerciseStyle::Bermudan;

    std::size_t periods() const { return dates.size() - 1; }  // M
    /// Number of monitor dates: M for Bermudan, 1 for European.
    std::size_t exercise_count() const { return style == ExerciseStyle::European ? 1 : periods(); }
    double accrual(std::size_t j) const { return dates[j] - dates[j - 1]; }
    double maturity() const { return dates.back(); }
    bool payer() const { return direction > 0; }
};

/// Validates ordering, direction and notional; throws std::invalid_argument.
void validate(const BermudanSpec& spec);

/// Schedule T_0, T_0 + 1/frequency, ..., T_M.
std::vector<double> make_schedule(double start, double end, int frequency);

BermudanSpec make_swaption(ExerciseStyle style, bool payer, double notional, double strike,
                           double start, double end, int frequency = 1);

/// A_{m,M}(t) = sum_{j>m} dT_j P(t, T_j)
double annuity(const GaussianModel& model, double t, std::span<const double> x,
               const BermudanSpec& spec, std::size_t m);

/// S_{m,M}(t) = (P(t,T_m) - P(t,T_M)) / A_{m,M}(t)
double swap_rate(const GaussianModel& model, double t, std::span<const double> x,
                 const BermudanSpec& spec, std::size_t m);

/// h_m at the monitor date T_m (may be negative).
double exercise_value(const GaussianModel& model, std::span<const double> x,
                      const BermudanSpec& spec, std::size_t m);

/// Time-zero forward swap rate S_{0,M}(0).
double initial_swap_rate(const GaussianModel& model, const BermudanSpec& spec);

/// h_m with the bond coefficients precomputed, for evaluation along paths.
class ExercisePayoff {
public:
    ExercisePayoff(const GaussianModel& model, const BermudanSpec& spec, std::size_t m);

    double operator()(std::span<const double> x) const;
    double exercise_date() const { return t_; }

private:
    double t_;
    double scale_;  // delta N
    double strike_;
    std::vector<double> accrual_;
    std::vector<BondCoeffs> bonds_;  // P(T_m, T_j), j = m+1..M
};

}  // namespace bermudan
