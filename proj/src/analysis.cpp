#include "usf/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "usf/errors.hpp"
#include "usf/fitting.hpp"
#include "usf/moments.hpp"
#include "usf/rng.hpp"

namespace usf {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;
constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }
double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

}  // namespace

FluxCheck first_order_flux_check(const std::vector<double>& t,
                                 const std::vector<double>& m12, double alpha,
                                 double b0, double window_start_frac,
                                 int n_batches) {
  if (t.size() != m12.size() || t.size() < 8)
    throw AnalysisError("flux check needs >= 8 series points");
  if (!(b0 > 0.0)) throw AnalysisError("flux check needs b0 > 0");

  const double t0 = t.front() + window_start_frac * (t.back() - t.front());
  std::vector<double> window;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= t0) window.push_back(m12[i]);
  if (window.size() < 8)
    throw AnalysisError("flux check window too short");

  FluxCheck out;
  out.n_points = window.size();
  double mean = 0.0;
  for (double v : window) mean += v;
  mean /= double(window.size());
  out.measured = mean;

  // batch means absorb the autocorrelation of the flux series
  n_batches = std::max(2, std::min<int>(n_batches, int(window.size() / 2)));
  std::vector<double> batch(std::size_t(n_batches), 0.0);
  const std::size_t per = window.size() / std::size_t(n_batches);
  for (int b = 0; b < n_batches; ++b) {
    const std::size_t lo = std::size_t(b) * per;
    const std::size_t hi = b + 1 == n_batches ? window.size() : lo + per;
    for (std::size_t i = lo; i < hi; ++i) batch[std::size_t(b)] += window[i];
    batch[std::size_t(b)] /= double(hi - lo);
  }
  double var = 0.0;
  for (double v : batch) var += (v - mean) * (v - mean);
  var /= double(n_batches - 1);
  out.sigma = std::sqrt(var / double(n_batches));

  out.first_order = alpha > 0.0 ? -alpha / (2.0 * b0) : 0.0;
  out.exact = alpha > 0.0
                  ? -3.0 * growth_rate_exact(alpha, b0).beta / alpha
                  : 0.0;
  out.gap_first = out.measured - out.first_order;
  out.gap_exact = out.measured - out.exact;
  out.gap_predictions = out.exact - out.first_order;
  return out;
}

ProfileDistance weighted_profile_distance(const Histogram2D& hist,
                                          double alpha, double b0,
                                          int weight_exponent,
                                          double max_rel_err) {
  if (hist.n_samples == 0) throw AnalysisError("empty histogram");
  if (weight_exponent < 0)
    throw AnalysisError("weight exponent must be >= 0");

  const double coef = alpha / (2.0 * b0);
  const double w = hist.bin_width();
  const double area = w * w;
  const double n_eff = double(hist.n_samples);

  ProfileDistance out;
  out.ref_alpha2 = alpha * alpha;
  out.weight_exponent = weight_exponent;

  double worst_err = 0.0;
  int worst_i = -1, worst_j = -1;
  for (int i = 0; i < hist.bins; ++i) {
    const double a = hist.lo + i * w;
    const double b = a + w;
    // Gaussian factors per axis: integral masses and first moments
    const double gi = normal_cdf(b) - normal_cdf(a);
    const double fi = normal_pdf(a) - normal_pdf(b);  // = Int xi phi
    for (int j = 0; j < hist.bins; ++j) {
      const double c = hist.lo + j * w;
      const double d = c + w;
      const double measured = hist.mass(i, j);
      if (measured <= 0.0) continue;
      ++out.n_occupied;

      const double rel_err = std::sqrt((1.0 - measured) / (n_eff * measured));
      if (rel_err >= max_rel_err) {
        if (rel_err > worst_err) {
          worst_err = rel_err;
          worst_i = i;
          worst_j = j;
        }
        continue;
      }
      ++out.n_vetted;

      const double gj = normal_cdf(d) - normal_cdf(c);
      const double fj = normal_pdf(c) - normal_pdf(d);
      const double predicted_mass = gi * gj - coef * fi * fj;

      const double x1 = 0.5 * (a + b);
      const double x2 = 0.5 * (c + d);
      const double weight =
          std::pow(1.0 + x1 * x1 + x2 * x2, double(weight_exponent));
      const double dist = weight * std::abs(measured - predicted_mass) / area;
      if (dist > out.distance) {
        out.distance = dist;
        out.argmax_i = i;
        out.argmax_j = j;
      }
    }
  }
  if (out.n_vetted == 0)
    throw AnalysisError(
        "histogram under-resolved: no bin has relative MC error < " +
        std::to_string(max_rel_err) + " (worst occupied bin (" +
        std::to_string(worst_i) + "," + std::to_string(worst_j) +
        ") at rel err " + std::to_string(worst_err) +
        "); accumulate more frames or particles");
  return out;
}

TailIndex tail_index(const std::vector<double>& speeds, double k_fraction,
                     int n_bootstrap, std::uint64_t seed) {
  if (!(k_fraction > 0.0) || k_fraction > 0.1)
    throw ConfigError("k_fraction must lie in (0, 0.1]", "k_fraction");
  const std::size_t n = speeds.size();
  const std::size_t k = std::size_t(k_fraction * double(n));
  if (k < 10)
    throw AnalysisError("tail fit needs k >= 10 exceedances, got " +
                        std::to_string(k));

  // top k+1 order statistics, descending
  std::vector<double> top(speeds);
  std::nth_element(top.begin(), top.begin() + std::ptrdiff_t(k), top.end(),
                   std::greater<>());
  top.resize(k + 1);
  std::sort(top.begin(), top.end(), std::greater<>());
  const double threshold = top[k];
  if (!(threshold > 0.0)) throw AnalysisError("tail threshold must be > 0");

  std::vector<double> log_excess(k);
  double mean = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    log_excess[i] = std::log(top[i] / threshold);
    mean += log_excess[i];
  }
  mean /= double(k);
  if (!(mean > 0.0)) throw AnalysisError("degenerate tail (all ties)");

  TailIndex out;
  out.a_hat = 1.0 / mean;
  out.k = k;
  out.threshold = threshold;

  RngStream rng(seed, rng_purpose::analysis);
  std::vector<double> boots;
  boots.reserve(std::size_t(std::max(0, n_bootstrap)));
  for (int b = 0; b < n_bootstrap; ++b) {
    double m = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      m += log_excess[std::size_t(rng.below(k))];
    m /= double(k);
    if (m > 0.0) boots.push_back(1.0 / m);
  }
  if (!boots.empty()) {
    out.ci_lo = percentile(boots, 0.025);
    out.ci_hi = percentile(boots, 0.975);
  }
  return out;
}

BoundednessScan moment_boundedness_scan(
    const std::vector<double>& t, const std::vector<int>& p_list,
    const std::vector<std::vector<double>>& pmoment_series,
    double window_start_frac) {
  if (p_list.size() != pmoment_series.size())
    throw AnalysisError("p_list / series size mismatch");
  BoundednessScan out;
  for (std::size_t c = 0; c < p_list.size(); ++c) {
    const auto& series = pmoment_series[c];
    if (series.size() != t.size())
      throw AnalysisError("pmoment series length mismatch");
    const double t0 = t.front() + window_start_frac * (t.back() - t.front());
    std::vector<double> ts, ys;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] < t0) continue;
      if (!(series[i] > 0.0))
        throw AnalysisError("radial moments must be positive");
      ts.push_back(t[i]);
      ys.push_back(std::log(series[i]));
    }
    if (ts.size() < 8) throw AnalysisError("boundedness window too short");
    const LineFit fit = fit_line(ts, ys);
    MomentBound row;
    row.p = p_list[c];
    row.slope = fit.slope;
    row.se = fit.slope_se;
    row.unbounded = fit.slope > 0.0 && fit.slope > 3.0 * fit.slope_se;
    if (row.unbounded && (out.p_star == 0 || row.p < out.p_star))
      out.p_star = row.p;
    out.table.push_back(row);
  }
  return out;
}

}  // namespace usf
