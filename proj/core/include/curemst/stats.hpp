#pragma once

#include <span>
#include <vector>

namespace curemst {

double normal_cdf(double x);
double normal_quantile(double p);

/// Type-1 empirical quantile: the order statistic at index ceil(B * q)
/// (1-based, clamped to [1, B]). `sorted` must be ascending and nonempty.
double empirical_quantile(std::span<const double> sorted, double q);

double mean(std::span<const double> v);
/// Sample standard deviation with divisor n - 1 (0 for n < 2).
double sample_sd(std::span<const double> v);

}  // namespace curemst
