#include "usf/fitting.hpp"

#include <algorithm>
#include <cmath>

#include "usf/errors.hpp"
#include "usf/rng.hpp"

namespace usf {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 3)
    throw AnalysisError("line fit needs >= 3 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw AnalysisError("line fit: degenerate abscissa");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.slope_se = std::sqrt(ss / (double(n - 2) * sxx));
  return f;
}

std::vector<double> block_bootstrap_slopes(const std::vector<double>& x,
                                           const std::vector<double>& y,
                                           const LineFit& fit, int n_boot,
                                           std::uint64_t seed,
                                           std::size_t block_len) {
  const std::size_t n = x.size();
  std::vector<double> resid(n);
  for (std::size_t i = 0; i < n; ++i)
    resid[i] = y[i] - (fit.intercept + fit.slope * x[i]);
  if (block_len == 0) block_len = std::max<std::size_t>(2, n / 20);
  block_len = std::min(block_len, n);
  const std::size_t n_blocks = (n + block_len - 1) / block_len;

  RngStream rng(seed, rng_purpose::analysis);
  std::vector<double> slopes;
  slopes.reserve(std::size_t(std::max(0, n_boot)));
  std::vector<double> yb(n);
  for (int b = 0; b < n_boot; ++b) {
    for (std::size_t k = 0; k < n_blocks; ++k) {
      const std::size_t start = std::size_t(rng.below(n));
      for (std::size_t j = 0; j < block_len; ++j) {
        const std::size_t idx = k * block_len + j;
        if (idx >= n) break;
        yb[idx] = fit.intercept + fit.slope * x[idx] + resid[(start + j) % n];
      }
    }
    slopes.push_back(fit_line(x, yb).slope);
  }
  return slopes;
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) throw AnalysisError("percentile of empty sample");
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(q, 0.0, 1.0) * double(v.size() - 1);
  const std::size_t lo = std::size_t(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - double(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace usf
