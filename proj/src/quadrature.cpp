#include "usf/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "usf/errors.hpp"

namespace usf {
namespace {

// 15-point Gauss-Legendre nodes/weights on [-1, 1] (symmetric half stored).
constexpr int kHalf = 8;
constexpr double kNodes[kHalf] = {
    0.0,
    0.2011940939974345223006283033945962078128,
    0.3941513470775633698972073709810454683627,
    0.5709721726085388475372267372539106412383,
    0.7244177313601700474161860546139380096308,
    0.8482065834104272162006483207742168513662,
    0.9372733924007059043077589477102094712439,
    0.9879925180204854284895657185866125811469,
};
constexpr double kWeights[kHalf] = {
    0.2025782419255612728806201999675193148386,
    0.1984314853271115764561183264438393248186,
    0.1861610000155622110268005618664228245062,
    0.1662692058169939335532008604812088111309,
    0.1395706779261543144478047945110283225208,
    0.1071592204671719350118695466858693034155,
    0.0703660474881081247092674164506673384667,
    0.0307532419961172683546283935772044177217,
};

double gl15(const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = kWeights[0] * f(mid);
  for (int i = 1; i < kHalf; ++i) {
    const double dx = half * kNodes[i];
    sum += kWeights[i] * (f(mid - dx) + f(mid + dx));
  }
  const double r = sum * half;
  if (!std::isfinite(r))
    throw GuardError("non-finite integrand encountered in quadrature");
  return r;
}

double adapt(const std::function<double(double)>& f, double a, double b,
             double whole, double tol, int depth) {
  if (depth <= 0)
    throw ConfigError("quadrature failed to converge (max depth reached)");
  const double mid = 0.5 * (a + b);
  const double left = gl15(f, a, mid);
  const double right = gl15(f, mid, b);
  const double err = std::abs(left + right - whole);
  if (err <= tol) return left + right;
  return adapt(f, a, mid, left, 0.5 * tol, depth - 1) +
         adapt(f, mid, b, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_gauss_legendre(const std::function<double(double)>& f,
                               double a, double b, double abs_tol,
                               int max_depth) {
  if (!(b > a)) return 0.0;
  return adapt(f, a, b, gl15(f, a, b), abs_tol, max_depth);
}

double adaptive_gauss_legendre_split(const std::function<double(double)>& f,
                                     double a, double b,
                                     std::vector<double> breakpoints,
                                     double abs_tol) {
  breakpoints.push_back(a);
  breakpoints.push_back(b);
  std::sort(breakpoints.begin(), breakpoints.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double lo = std::max(a, breakpoints[i]);
    const double hi = std::min(b, breakpoints[i + 1]);
    if (hi > lo)
      total += adaptive_gauss_legendre(f, lo, hi,
                                       abs_tol / double(breakpoints.size()));
  }
  return total;
}

}  // namespace usf
