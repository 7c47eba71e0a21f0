#include <cmath>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "usf/analysis.hpp"
#include "usf/errors.hpp"
#include "usf/fitting.hpp"
#include "usf/histogram.hpp"
#include "usf/quadrature.hpp"
#include "usf/rng.hpp"

using namespace usf;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kB0 = kPi / 2;

double phi(double v) { return std::exp(-0.5 * v * v) / std::sqrt(2 * kPi); }

// first-order shear density in (v1, v2), v3 integrated out
double profile_density(double v1, double v2, double alpha) {
  return (1.0 - alpha / (2 * kB0) * v1 * v2) * phi(v1) * phi(v2);
}

// histogram filled with the exact bin masses of `density`, via quadrature
Histogram2D analytic_histogram(int bins, double range,
                               const std::function<double(double, double)>& density) {
  Histogram2D h(bins, -range, range);
  const double w = h.bin_width();
  double total = 0.0;
  for (int i = 0; i < bins; ++i)
    for (int j = 0; j < bins; ++j) {
      const double a = h.lo + i * w, c = h.lo + j * w;
      const double mass = adaptive_gauss_legendre(
          [&](double v1) {
            return adaptive_gauss_legendre(
                [&](double v2) { return density(v1, v2); }, c, c + w, 1e-13);
          },
          a, a + w, 1e-13);
      h.counts[std::size_t(i) * bins + j] = mass;
      total += mass;
    }
  // represent an effectively noise-free sample
  const double scale = 1e15;
  for (double& c : h.counts) c *= scale;
  h.n_samples = std::uint64_t(scale);
  h.n_overflow = std::uint64_t((1.0 - total) * scale);
  h.n_frames = 1;
  return h;
}
}  // namespace

TEST_CASE("line fit: exact line, noisy line, validation") {
  std::vector<double> x, y;
  for (int i = 0; i < 50; ++i) {
    x.push_back(0.3 * i);
    y.push_back(2.0 * x.back() + 1.0);
  }
  auto fit = fit_line(x, y);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.slope_se < 1e-12);

  RngStream rng(4, rng_purpose::analysis);
  for (auto& yi : y) yi += 0.05 * rng.normal();
  auto nf = fit_line(x, y);
  CHECK(std::fabs(nf.slope - 2.0) < 3 * nf.slope_se);
  CHECK(nf.slope_se > 0.0);

  std::vector<double> two = {0, 1}, twoy = {0, 1};
  CHECK_THROWS_AS(fit_line(two, twoy), AnalysisError);
}

TEST_CASE("percentile: order statistics with interpolation") {
  std::vector<double> v = {5, 3, 1, 4, 2};
  CHECK(percentile(v, 0.0) == 1.0);
  CHECK(percentile(v, 1.0) == 5.0);
  CHECK(percentile(v, 0.5) == 3.0);
  CHECK(percentile(v, 0.25) == 2.0);
  CHECK(percentile(v, 0.375) == doctest::Approx(2.5));
}

TEST_CASE("flux check: synthetic stationary stress") {
  std::vector<double> t, m12;
  RngStream rng(12, rng_purpose::analysis);
  const double level = -0.0317880879429;  // steady <v1 v2> at alpha = 0.1
  for (int i = 0; i <= 400; ++i) {
    t.push_back(0.25 * i);
    m12.push_back(level + 1e-4 * rng.normal());
  }
  auto fc = first_order_flux_check(t, m12, 0.1, kB0);
  CHECK(fc.measured == doctest::Approx(level).epsilon(1e-3));
  CHECK(fc.first_order == doctest::Approx(-0.1 / (2 * kB0)).epsilon(1e-12));
  CHECK(fc.exact == doctest::Approx(level).epsilon(1e-9));
  CHECK(std::fabs(fc.measured - fc.exact) < 4 * fc.sigma);
  CHECK(fc.gap_predictions ==
        doctest::Approx(fc.exact - fc.first_order).epsilon(1e-12));
  // only the second half of the series enters
  CHECK(fc.n_points == 201);
}

TEST_CASE("flux check: alpha = 0 predicts zero stress") {
  std::vector<double> t, m12;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.1 * i);
    m12.push_back(0.0);
  }
  auto fc = first_order_flux_check(t, m12, 0.0, kB0);
  CHECK(fc.first_order == 0.0);
  CHECK(fc.exact == 0.0);
  CHECK(fc.measured == 0.0);
}

TEST_CASE("profile distance vanishes when the data equals the prediction") {
  const double alpha = 0.25;
  auto h = analytic_histogram(24, 3.0, [&](double v1, double v2) {
    return profile_density(v1, v2, alpha);
  });
  auto pd = weighted_profile_distance(h, alpha, kB0, 1);
  CHECK(pd.n_vetted > 500);
  CHECK(pd.distance < 1e-9);
  CHECK(pd.ref_alpha2 == doctest::Approx(alpha * alpha));
}

TEST_CASE("profile distance of the plain maxwellian matches quadrature") {
  // data with no shear correction; the reported distance must equal the
  // weighted first-order term, computed here by numeric integration only
  const double alpha = 0.3;
  auto h = analytic_histogram(20, 2.5, [&](double v1, double v2) {
    return phi(v1) * phi(v2);
  });
  auto pd = weighted_profile_distance(h, alpha, kB0, 1);

  const double w = h.bin_width(), area = w * w;
  double expect = 0.0;
  for (int i = 0; i < h.bins; ++i)
    for (int j = 0; j < h.bins; ++j) {
      const double a = h.lo + i * w, c = h.lo + j * w;
      auto vphi = [](double v) { return v * phi(v); };
      const double bi = adaptive_gauss_legendre(vphi, a, a + w, 1e-14);
      const double bj = adaptive_gauss_legendre(vphi, c, c + w, 1e-14);
      const double x1 = a + 0.5 * w, x2 = c + 0.5 * w;
      const double weight = 1.0 + x1 * x1 + x2 * x2;
      expect = std::max(
          expect, weight * alpha / (2 * kB0) * std::fabs(bi * bj) / area);
    }
  CHECK(pd.distance == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("profile distance is linear in alpha and stable under refinement") {
  auto maxwellian = [&](double v1, double v2) { return phi(v1) * phi(v2); };
  auto h = analytic_histogram(24, 3.0, maxwellian);
  const double d1 = weighted_profile_distance(h, 0.1, kB0, 1).distance;
  const double d2 = weighted_profile_distance(h, 0.2, kB0, 1).distance;
  CHECK(d2 / d1 == doctest::Approx(2.0).epsilon(1e-10));

  auto h2 = analytic_histogram(48, 3.0, maxwellian);
  const double d1f = weighted_profile_distance(h2, 0.1, kB0, 1).distance;
  CHECK(d1f / d1 == doctest::Approx(1.0).epsilon(0.1));

  // heavier weight exponent can only increase the sup
  const double dw2 = weighted_profile_distance(h, 0.1, kB0, 2).distance;
  CHECK(dw2 >= d1);
}

TEST_CASE("profile distance from a finite sample sits near the analytic value") {
  RngStream rng(88, rng_purpose::analysis);
  ParticleEnsemble ens;
  const std::size_t n = 2000000;
  init_maxwellian(ens, n, rng);
  Histogram2D h(40, -4.5, 4.5);
  h.accumulate(ens);

  const double alpha = 0.3;
  auto pd = weighted_profile_distance(h, alpha, kB0, 1);
  auto ha = analytic_histogram(40, 4.5,
                               [&](double v1, double v2) { return phi(v1) * phi(v2); });
  auto pda = weighted_profile_distance(ha, alpha, kB0, 1);
  CHECK(pd.distance > 0.5 * pda.distance);
  CHECK(pd.distance < 3.0 * pda.distance);
}

TEST_CASE("under-resolved histogram raises an analysis error") {
  RngStream rng(2, rng_purpose::analysis);
  ParticleEnsemble ens;
  init_maxwellian(ens, 200, rng);
  Histogram2D h(60, -4.5, 4.5);
  h.accumulate(ens);
  CHECK_THROWS_AS(weighted_profile_distance(h, 0.1, kB0, 1), AnalysisError);
  CHECK_THROWS_WITH_AS(weighted_profile_distance(h, 0.1, kB0, 1),
                       doctest::Contains("under-resolved"), AnalysisError);
}

TEST_CASE("hill estimator recovers a pareto exponent") {
  RngStream rng(55, rng_purpose::analysis);
  const double a = 6.0;
  std::vector<double> x(200000);
  for (double& xi : x) xi = std::pow(1.0 - rng.uniform(), -1.0 / a);
  auto ti = tail_index(x, 0.05);
  CHECK(ti.a_hat == doctest::Approx(a).epsilon(0.08));
  CHECK(ti.ci_lo < a);
  CHECK(ti.ci_hi > a);
  CHECK(ti.k == 10000);
  CHECK(ti.threshold > 1.0);
}

TEST_CASE("gaussian speeds look ever steeper as the tail fraction shrinks") {
  RngStream rng(66, rng_purpose::analysis);
  std::vector<double> speeds(200000);
  for (double& s : speeds) {
    const double v1 = rng.normal(), v2 = rng.normal(), v3 = rng.normal();
    s = std::sqrt(v1 * v1 + v2 * v2 + v3 * v3);
  }
  const double a_wide = tail_index(speeds, 0.1).a_hat;
  const double a_mid = tail_index(speeds, 0.03).a_hat;
  const double a_deep = tail_index(speeds, 0.01).a_hat;
  CHECK(a_wide < a_mid);
  CHECK(a_mid < a_deep);
  CHECK(a_deep > 10.0);  // nothing power-law about a gaussian
}

TEST_CASE("hill estimator argument validation") {
  std::vector<double> x(1000, 1.5);
  CHECK_THROWS_AS(tail_index(x, 0.0), ConfigError);
  CHECK_THROWS_AS(tail_index(x, 0.2), ConfigError);
  std::vector<double> tiny(50, 1.5);
  CHECK_THROWS_AS(tail_index(tiny, 0.1), AnalysisError);  // k would be 5
}

TEST_CASE("boundedness scan flags the smallest growing moment") {
  std::vector<double> t;
  std::vector<double> p2, p4, p6;
  RngStream rng(10, rng_purpose::analysis);
  for (int i = 0; i <= 200; ++i) {
    t.push_back(0.5 * i);
    p2.push_back(3.0 + 0.01 * rng.normal());
    p4.push_back(15.0 * std::exp(-0.01 * t.back()) + 0.01 * rng.normal());
    p6.push_back(100.0 * std::exp(0.05 * t.back()));
  }
  auto scan = moment_boundedness_scan(t, {2, 4, 6}, {p2, p4, p6});
  REQUIRE(scan.table.size() == 3);
  CHECK_FALSE(scan.table[0].unbounded);
  CHECK_FALSE(scan.table[1].unbounded);  // decaying
  CHECK(scan.table[2].unbounded);
  CHECK(scan.table[2].slope == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(scan.p_star == 6);

  auto flat = moment_boundedness_scan(t, {2, 4}, {p2, p2});
  CHECK(flat.p_star == 0);
}

TEST_CASE("histogram csv roundtrip is exact") {
  RngStream rng(14, rng_purpose::analysis);
  ParticleEnsemble ens;
  init_maxwellian(ens, 10000, rng);
  Histogram2D h(16, -3.5, 3.5);
  h.accumulate(ens);
  h.accumulate(ens);
  CHECK(h.n_frames == 2);
  CHECK(h.n_samples == 20000);

  double mass_sum = 0.0;
  for (int i = 0; i < h.bins; ++i)
    for (int j = 0; j < h.bins; ++j) mass_sum += h.mass(i, j);
  CHECK(mass_sum + double(h.n_overflow) / double(h.n_samples) ==
        doctest::Approx(1.0).epsilon(1e-12));

  namespace fs = std::filesystem;
  const auto path = fs::temp_directory_path() / "usf_hist_roundtrip.csv";
  h.write_csv(path.string());
  auto r = Histogram2D::read_csv(path.string());
  CHECK(r.bins == h.bins);
  CHECK(r.lo == h.lo);
  CHECK(r.hi == h.hi);
  CHECK(r.n_samples == h.n_samples);
  CHECK(r.n_overflow == h.n_overflow);
  CHECK(r.n_frames == h.n_frames);
  for (std::size_t k = 0; k < h.counts.size(); ++k)
    CHECK(r.counts[k] == h.counts[k]);
  fs::remove(path);
}
