#include "bermudan/instruments.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "bermudan/errors.hpp"

namespace bermudan {

void validate(const BermudanSpec& spec) {
    if (spec.dates.size() < 2) throw std::invalid_argument("swap needs at least one period");
    if (spec.dates[0] < 0.0) throw std::invalid_argument("first date must be >= 0");
    for (std::size_t j = 1; j < spec.dates.size(); ++j)
        if (!(spec.dates[j] > spec.dates[j - 1]))
            throw std::invalid_argument("swap dates must be strictly increasing");
    if (spec.direction != 1 && spec.direction != -1)
        throw std::invalid_argument("direction must be +1 (payer) or -1 (receiver)");
    if (!(spec.notional > 0.0)) throw std::invalid_argument("notional must be positive");
    if (!std::isfinite(spec.strike)) throw std::invalid_argument("strike must be finite");
}

std::vector<double> make_schedule(double start, double end, int frequency) {
    if (frequency <= 0) throw std::invalid_argument("frequency must be positive");
    if (!(end > start) || start < 0.0) throw std::invalid_argument("need 0 <= start < end");
    const double n = (end - start) * frequency;
    const auto periods = static_cast<long>(std::llround(n));
    if (periods < 1 || std::abs(n - static_cast<double>(periods)) > 1e-9)
        throw std::invalid_argument("tenor is not a whole number of periods");
    std::vector<double> dates;
    for (long j = 0; j <= periods; ++j) dates.push_back(start + static_cast<double>(j) / frequency);
    dates.back() = end;
    return dates;
}

BermudanSpec make_swaption(ExerciseStyle style, bool payer, double notional, double strike,
                           double start, double end, int frequency) {
    BermudanSpec spec;
    spec.style = style;
    spec.direction = payer ? 1 : -1;
    spec.notional = notional;
    spec.strike = strike;
    spec.dates = make_schedule(start, end, frequency);
    validate(spec);
    return spec;
}

namespace {

void check_index(const BermudanSpec& spec, std::size_t m) {
    if (m >= spec.periods())
        throw std::domain_error("exercise index " + std::to_string(m) + " out of range");
}

}  // namespace

double annuity(const GaussianModel& model, double t, std::span<const double> x,
               const BermudanSpec& spec, std::size_t m) {
    check_index(spec, m);
    if (t > spec.dates[m + 1]) throw std::domain_error("annuity evaluated after first payment");
    double a = 0.0;
    for (std::size_t j = m + 1; j < spec.dates.size(); ++j) {
        if (spec.dates[j] < t) continue;
        a += spec.accrual(j) * bond_price(model, t, spec.dates[j], x);
    }
    return a;
}

double swap_rate(const GaussianModel& model, double t, std::span<const double> x,
                 const BermudanSpec& spec, std::size_t m) {
    const double a = annuity(model, t, x, spec, m);
    if (!(a > 0.0)) throw NumericError("zero annuity");
    return (bond_price(model, t, spec.dates[m], x) - bond_price(model, t, spec.maturity(), x)) / a;
}

double exercise_value(const GaussianModel& model, std::span<const double> x,
                      const BermudanSpec& spec, std::size_t m) {
    check_index(spec, m);
    return ExercisePayoff(model, spec, m)(x);
}

double initial_swap_rate(const GaussianModel& model, const BermudanSpec& spec) {
    std::vector<double> x0(model.factors(), 0.0);
    return swap_rate(model, 0.0, x0, spec, 0);
}

ExercisePayoff::ExercisePayoff(const GaussianModel& model, const BermudanSpec& spec, std::size_t m)
    : t_(spec.dates.at(m)), scale_(spec.direction * spec.notional), strike_(spec.strike) {
    check_index(spec, m);
    for (std::size_t j = m + 1; j < spec.dates.size(); ++j) {
        accrual_.push_back(spec.accrual(j));
        bonds_.push_back(bond_coeffs(model, t_, spec.dates[j]));
    }
}

double ExercisePayoff::operator()(std::span<const double> x) const {
    // A (S - K) = 1 - P(T_m, T_M) - K A
    double a = 0.0;
    double last = 0.0;
    for (std::size_t j = 0; j < bonds_.size(); ++j) {
        last = bonds_[j].price(x);
        a += accrual_[j] * last;
    }
    return scale_ * (1.0 - last - strike_ * a);
}

}  // namespace bermudan
