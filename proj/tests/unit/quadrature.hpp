#pragma once

// Stand-alone Hull-White reference prices for the tests. Everything here is
// written from the textbook formulas and shares no code with the library.

#include <vector>

namespace oracle {

struct HullWhite {
    double a = 0.01;
    double sigma = 0.01;
    double f0 = 0.03;
};

/// Zero bond P(t,T) in state x of the mean-zero factor.
double bond(const HullWhite& m, double t, double T, double x);

/// Backward induction on a state grid with Gaussian-density convolution
/// between monitor dates under successive forward measures. With bermudan
/// false only the first date is an exercise date.
double swaption(const HullWhite& m, bool payer, double notional, double strike,
                const std::vector<double>& dates, bool bermudan, int grid = 2001);

/// Flat-curve forward swap rate for the schedule.
double swap_rate(double f0, const std::vector<double>& dates);

}  // namespace oracle
