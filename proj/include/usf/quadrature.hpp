#pragma once

#include <functional>
#include <vector>

namespace usf {

// Adaptive 15-point Gauss-Legendre. The interval is refined by bisection
// until |GL15(whole) - GL15(left) - GL15(right)| is below the local error
// budget. Throws GuardError on non-finite integrand values, ConfigError on
// failure to converge.
double adaptive_gauss_legendre(const std::function<double(double)>& f,
                               double a, double b, double abs_tol,
                               int max_depth = 48);

// Same, but the integration is split at the given interior breakpoints first
// (integrand kinks, e.g. at z = 0 for |z|-like kernels, or table knots).
double adaptive_gauss_legendre_split(const std::function<double(double)>& f,
                                     double a, double b,
                                     std::vector<double> breakpoints,
                                     double abs_tol);

}  // namespace usf
