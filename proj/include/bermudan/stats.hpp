#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bermudan {

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

/// Pairwise summation, independent of how the data was produced.
double pairwise_sum(std::span<const double> v);
double mean(std::span<const double> v);
/// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_sd(std::span<const double> v);
/// Mean and standard error of the mean.
Estimate mean_se(std::span<const double> v);
/// Linear-interpolated quantile, p in [0,1].
double quantile(std::vector<double> v, double p);

}  // namespace bermudan
