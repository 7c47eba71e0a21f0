#pragma once

#include <cstdint>
#include <vector>

namespace usf {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;  // OLS standard error (iid residual assumption)
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Circular block bootstrap of OLS residuals: resampled slopes for CI
// construction. Block length defaults to ~ n/20 (>= 2).
std::vector<double> block_bootstrap_slopes(const std::vector<double>& x,
                                           const std::vector<double>& y,
                                           const LineFit& fit, int n_boot,
                                           std::uint64_t seed,
                                           std::size_t block_len = 0);

// q in [0, 1]; linear interpolation between order statistics.
double percentile(std::vector<double> v, double q);

}  // namespace usf
