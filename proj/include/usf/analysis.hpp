#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "usf/histogram.hpp"

namespace usf {

// Steady heat-flux comparison: the time-averaged <xi1 xi2> against the
// first-order prediction -alpha/(2 b0) and the exact self-similar value
// -3 beta/alpha. sigma is a batch-mean Monte Carlo error bar on the average.
struct FluxCheck {
  double measured = 0.0;
  double sigma = 0.0;
  double first_order = 0.0;   // -alpha/(2 b0)
  double exact = 0.0;         // -3 beta / alpha
  double gap_first = 0.0;     // measured - first_order
  double gap_exact = 0.0;     // measured - exact
  double gap_predictions = 0.0;  // exact - first_order (O(alpha^3))
  std::size_t n_points = 0;
};

FluxCheck first_order_flux_check(const std::vector<double>& t,
                                 const std::vector<double>& m12,
                                 double alpha, double b0,
                                 double window_start_frac = 0.5,
                                 int n_batches = 20);

// Weighted sup-distance between the measured (xi1, xi2) histogram and the
// first-order profile (1 - (alpha/(2 b0)) xi1 xi2) mu, with xi3 integrated
// out analytically. Both sides enter as bin-averaged densities (mass / bin
// area), which makes the statistic stable under bin refinement. Only bins
// whose estimated relative Monte Carlo error is below max_rel_err
// participate; if none qualify, throws AnalysisError naming the worst bins.
struct ProfileDistance {
  double distance = 0.0;
  double ref_alpha2 = 0.0;     // alpha^2, the expected scale of the distance
  int argmax_i = -1, argmax_j = -1;
  std::size_t n_vetted = 0;
  std::size_t n_occupied = 0;
  int weight_exponent = 1;
};

ProfileDistance weighted_profile_distance(const Histogram2D& hist,
                                          double alpha, double b0,
                                          int weight_exponent = 1,
                                          double max_rel_err = 0.25);

// Hill estimator of the polynomial tail exponent a (P(|xi| > s) ~ s^-a) from
// the top k = floor(k_fraction * n) order statistics, with a percentile
// bootstrap CI over the exceedances. Requires 0 < k_fraction <= 0.1.
struct TailIndex {
  double a_hat = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  std::size_t k = 0;
  double threshold = 0.0;  // the (k+1)-th largest speed
};

TailIndex tail_index(const std::vector<double>& speeds, double k_fraction,
                     int n_bootstrap = 400, std::uint64_t seed = 0x7a11);

// Flags <|xi|^p> as unbounded when the fitted slope of log <|xi|^p> over the
// second half of the series is positive and exceeds 3x its standard error.
struct MomentBound {
  int p = 0;
  double slope = 0.0;
  double se = 0.0;
  bool unbounded = false;
};

struct BoundednessScan {
  std::vector<MomentBound> table;
  int p_star = 0;  // smallest flagged p; 0 = none flagged
};

BoundednessScan moment_boundedness_scan(
    const std::vector<double>& t,
    const std::vector<int>& p_list,
    const std::vector<std::vector<double>>& pmoment_series,
    double window_start_frac = 0.5);

}  // namespace usf
