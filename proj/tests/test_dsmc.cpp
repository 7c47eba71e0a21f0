#include <cmath>
#include <cstring>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "usf/backend.hpp"
#include "usf/dsmc.hpp"
#include "usf/ensemble.hpp"
#include "usf/errors.hpp"
#include "usf/moments.hpp"
#include "usf/runs.hpp"

using namespace usf;

namespace {
constexpr double kPi = 3.14159265358979323846;

double component_mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}
}  // namespace

TEST_CASE("maxwellian init: zero momentum, unit covariance, stretch") {
  RngStream rng(42, rng_purpose::velocity_init);
  ParticleEnsemble ens;
  const std::size_t n = 200000;
  init_maxwellian(ens, n, rng);
  REQUIRE(ens.size() == n);
  CHECK(ens.x.empty());

  CHECK(std::fabs(component_mean(ens.v1)) < 1e-13);
  CHECK(std::fabs(component_mean(ens.v2)) < 1e-13);
  CHECK(std::fabs(component_mean(ens.v3)) < 1e-13);

  auto M = measure_moments(ens);
  const double sig_diag = std::sqrt(2.0 / double(n));  // Var(xi^2) = 2
  const double sig_off = 1.0 / std::sqrt(double(n));
  CHECK(std::fabs(M.m[0] - 1.0) < 5 * sig_diag);
  CHECK(std::fabs(M.m[3] - 1.0) < 5 * sig_diag);
  CHECK(std::fabs(M.m[5] - 1.0) < 5 * sig_diag);
  CHECK(std::fabs(M.m[1]) < 5 * sig_off);
  CHECK(std::fabs(M.m[2]) < 5 * sig_off);
  CHECK(std::fabs(M.m[4]) < 5 * sig_off);

  RngStream rng2(42, rng_purpose::velocity_init);
  ParticleEnsemble ens2;
  init_maxwellian(ens2, n, rng2, {2.0, 1.0, 0.5});
  auto M2 = measure_moments(ens2);
  CHECK(std::fabs(component_mean(ens2.v1)) < 1e-13);
  CHECK(M2.m[0] == doctest::Approx(4.0 * M.m[0]).epsilon(1e-12));
  CHECK(M2.m[5] == doctest::Approx(0.25 * M.m[5]).epsilon(1e-12));
}

TEST_CASE("transport map: worked example and exact composition") {
  ParticleEnsemble ens;
  ens.v1 = {1.0};
  ens.v2 = {1.0};
  ens.v3 = {1.0};
  const double alpha = 0.5, beta = 0.1, dt = 0.2;
  shear_transport_step(ens, alpha, beta, dt);
  const double decay = std::exp(-beta * dt);
  CHECK(ens.v1[0] == doctest::Approx(decay * (1.0 - alpha * dt)).epsilon(1e-15));
  CHECK(ens.v2[0] == doctest::Approx(decay).epsilon(1e-15));
  CHECK(ens.v3[0] == doctest::Approx(decay).epsilon(1e-15));

  // two half steps equal one full step (the map is the exact flow)
  RngStream rng(7, rng_purpose::velocity_init);
  ParticleEnsemble a, b;
  init_maxwellian(a, 5000, rng);
  b = a;
  shear_transport_step(a, alpha, beta, dt);
  shear_transport_step(a, alpha, beta, dt);
  shear_transport_step(b, alpha, beta, 2 * dt);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.v1[i] == doctest::Approx(b.v1[i]).epsilon(1e-13));
    CHECK(a.v2[i] == doctest::Approx(b.v2[i]).epsilon(1e-13));
  }
}

TEST_CASE("threaded transport is identical to single-threaded") {
  RngStream rng(11, rng_purpose::velocity_init);
  ParticleEnsemble a;
  init_maxwellian(a, 20001, rng);  // odd size: uneven spans
  ParticleEnsemble b = a;
  shear_transport_step(a, 0.3, 0.02, 0.01, 0);
  shear_transport_step(b, 0.3, 0.02, 0.01, 3);
  CHECK(std::memcmp(a.v1.data(), b.v1.data(), a.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(a.v2.data(), b.v2.data(), a.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(a.v3.data(), b.v3.data(), a.size() * sizeof(double)) == 0);
}

TEST_CASE("dynamic beta tracks the shear stress") {
  // hand-built ensemble with M12 = 1
  ParticleEnsemble ens;
  ens.v1 = {1.0, -1.0};
  ens.v2 = {1.0, -1.0};
  ens.v3 = {0.0, 0.0};
  CHECK(dynamic_beta(ens, 0.6) == doctest::Approx(-0.2).epsilon(1e-14));

  // isotropic ensemble: beta is MC noise around zero
  RngStream rng(3, rng_purpose::velocity_init);
  ParticleEnsemble iso;
  init_maxwellian(iso, 100000, rng);
  CHECK(std::fabs(dynamic_beta(iso, 0.3)) < 0.3 / 3.0 * 5.0 / std::sqrt(1e5));
}

TEST_CASE("event counting: floor plus carry loses nothing") {
  std::vector<std::uint32_t> pool(1000);
  std::iota(pool.begin(), pool.end(), 0u);
  std::vector<double> v1(1000, 0.0), v2(1000, 0.0), v3(1000, 0.0);
  RngStream vel(5, rng_purpose::velocity_init);
  for (auto& v : v1) v = vel.normal();
  for (auto& v : v2) v = vel.normal();
  for (auto& v : v3) v = vel.normal();

  auto kernel = CollisionKernel::cutoff_maxwell();
  RngStream rng(5, rng_purpose::collisions);
  CollisionStats stats;
  double carry = 0.0;
  const double expected = 7.3;
  const int k_steps = 50;
  for (int s = 0; s < k_steps; ++s)
    collide_pool(pool.data(), pool.size(), v1.data(), v2.data(), v3.data(),
                 expected, carry, kernel, rng, stats);
  const double total = double(stats.executed + stats.zero_rel);
  CHECK(stats.rolled_back == 0);
  CHECK(std::fabs(total + carry - k_steps * expected) < 1e-9);
  CHECK(carry >= 0.0);
  CHECK(carry < 1.0);
}

TEST_CASE("pool exhaustion rolls events back into the carry") {
  std::vector<std::uint32_t> pool = {0, 1, 2};
  std::vector<double> v1 = {0, 1, 2}, v2 = {0, -1, 2}, v3 = {1, 1, 0};
  auto kernel = CollisionKernel::cutoff_maxwell();
  RngStream rng(1, rng_purpose::collisions);
  CollisionStats stats;
  double carry = 0.0;
  collide_pool(pool.data(), 3, v1.data(), v2.data(), v3.data(), 5.0, carry,
               kernel, rng, stats);
  CHECK(stats.executed + stats.zero_rel == 1);  // one pair fits in 3 particles
  CHECK(stats.rolled_back == 4);
  CHECK(carry == doctest::Approx(4.0));
}

TEST_CASE("poisson counts: right mean, carry untouched") {
  std::vector<std::uint32_t> pool(400);
  std::iota(pool.begin(), pool.end(), 0u);
  std::vector<double> v1(400), v2(400), v3(400);
  RngStream vel(8, rng_purpose::velocity_init);
  for (auto& v : v1) v = vel.normal();
  for (auto& v : v2) v = vel.normal();
  for (auto& v : v3) v = vel.normal();
  auto kernel = CollisionKernel::cutoff_maxwell();
  RngStream rng(8, rng_purpose::collisions);
  CollisionStats stats;
  double carry = 0.0;
  const double lambda = 37.5;  // exercises the recursive halving branch
  const int k_steps = 2000;
  for (int s = 0; s < k_steps; ++s)
    collide_pool(pool.data(), pool.size(), v1.data(), v2.data(), v3.data(),
                 lambda, carry, kernel, rng, stats, true);
  CHECK(carry == 0.0);
  const double mean = double(stats.executed + stats.zero_rel) / k_steps;
  CHECK(std::fabs(mean - lambda) < 5.0 * std::sqrt(lambda / k_steps));
}

TEST_CASE("collision step conserves momentum and energy, counts at nu0") {
  RngStream vel(21, rng_purpose::velocity_init);
  ParticleEnsemble ens;
  const std::size_t n = 10000;
  init_maxwellian(ens, n, vel);
  auto kernel = CollisionKernel::cutoff_maxwell();
  RngStream coll(21, rng_purpose::collisions);
  CollisionStats stats;
  double carry = 0.0;
  const double dt = 0.01;

  const double p0[3] = {component_mean(ens.v1), component_mean(ens.v2),
                        component_mean(ens.v3)};
  const double e0 = measure_moments(ens).trace();

  const int k_steps = 100;
  for (int s = 0; s < k_steps; ++s)
    collision_step(ens, kernel, dt, carry, coll, stats);

  // expected pair count: N nu0 dt / 2 per step, nu0 = 2 pi
  const double expected = double(n) * 2.0 * kPi * dt / 2.0 * k_steps;
  CHECK(double(stats.executed + stats.zero_rel) ==
        doctest::Approx(expected).epsilon(1e-4));
  CHECK(stats.rolled_back == 0);

  CHECK(std::fabs(component_mean(ens.v1) - p0[0]) < 1e-12);
  CHECK(std::fabs(component_mean(ens.v2) - p0[1]) < 1e-12);
  CHECK(std::fabs(component_mean(ens.v3) - p0[2]) < 1e-12);
  CHECK(measure_moments(ens).trace() == doctest::Approx(e0).epsilon(1e-12));
}

TEST_CASE("collision step guard rejects oversized dt") {
  RngStream vel(2, rng_purpose::velocity_init);
  ParticleEnsemble ens;
  init_maxwellian(ens, 100, vel);
  auto kernel = CollisionKernel::cutoff_maxwell();
  RngStream coll(2, rng_purpose::collisions);
  CollisionStats stats;
  double carry = 0.0;
  // dt * nu0 = 0.1 * 2 pi > 0.5
  CHECK_THROWS_AS(collision_step(ens, kernel, 0.1, carry, coll, stats),
                  GuardError);
}

TEST_CASE("collisions relax anisotropy at rate 2 b0") {
  RngStream vel(37, rng_purpose::velocity_init);
  ParticleEnsemble ens;
  const std::size_t n = 200000;
  init_maxwellian(ens, n, vel, {1.2, 0.9, 1.0});
  auto kernel = CollisionKernel::cutoff_maxwell();
  RngStream coll(37, rng_purpose::collisions);
  CollisionStats stats;
  double carry = 0.0;

  auto M0 = measure_moments(ens);
  const double a0 = M0.m[0] - M0.m[3];
  const double dt = 2e-3, t_end = 0.3;
  const int k_steps = int(t_end / dt + 0.5);
  for (int s = 0; s < k_steps; ++s)
    collision_step(ens, kernel, dt, carry, coll, stats);
  auto M1 = measure_moments(ens);
  const double a1 = M1.m[0] - M1.m[3];

  const double rate = -std::log(a1 / a0) / t_end;
  CHECK(rate == doctest::Approx(2.0 * kernel.b0()).epsilon(0.05));
}

TEST_CASE("energy growth fit recovers a synthetic exponential exactly") {
  std::vector<double> t, trace;
  const double beta0 = 3e-3;
  for (int i = 0; i <= 200; ++i) {
    t.push_back(0.5 * i);
    trace.push_back(3.0 * std::exp(2.0 * beta0 * t.back()));
  }
  auto fit = measure_beta_from_energy(t, trace, 0.25, 50);
  CHECK(fit.beta_hat == doctest::Approx(beta0).epsilon(1e-10));
  CHECK(fit.window_t0 == doctest::Approx(25.0).epsilon(1e-9));
  CHECK(fit.n_points > 100);
  // growth is significant but the window spans only ~0.2 e-folds
  CHECK(fit.efolds_spanned < 1.0);
  CHECK_FALSE(fit.span_ok);

  // a window long enough to span 5 e-folds clears the flag
  std::vector<double> t2, tr2;
  for (int i = 0; i <= 200; ++i) {
    t2.push_back(50.0 * i);
    tr2.push_back(3.0 * std::exp(2.0 * beta0 * t2.back()));
  }
  auto fit2 = measure_beta_from_energy(t2, tr2, 0.25, 50);
  CHECK(fit2.span_ok);
  CHECK(fit2.beta_hat == doctest::Approx(beta0).epsilon(1e-10));
}

TEST_CASE("flat noisy energy: no significant growth, span check passes") {
  RngStream rng(9, rng_purpose::analysis);
  std::vector<double> t, trace;
  for (int i = 0; i <= 300; ++i) {
    t.push_back(0.1 * i);
    trace.push_back(3.0 + 0.003 * rng.normal());
  }
  auto fit = measure_beta_from_energy(t, trace);
  CHECK(std::fabs(fit.beta_hat) < 5e-4);
  CHECK(fit.span_ok);  // nothing grows, nothing to span
  CHECK(fit.ci_lo <= fit.beta_hat);
  CHECK(fit.ci_hi >= fit.beta_hat);
}

TEST_CASE("energy fit input validation") {
  std::vector<double> t = {0, 1, 2}, tr = {3, 3, 3};
  CHECK_THROWS_AS(measure_beta_from_energy(t, tr), AnalysisError);
  std::vector<double> t4 = {0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<double> neg = {3, 3, 3, -3, 3, 3, 3, 3};
  CHECK_THROWS_AS(measure_beta_from_energy(t4, neg), AnalysisError);
  std::vector<double> ok(t4.size(), 3.0);
  CHECK_THROWS_AS(measure_beta_from_energy(t4, ok, 1.5), AnalysisError);
}

TEST_CASE("homogeneous driver: determinism and backend equivalence") {
  RunConfig cfg;
  cfg.mode = "self_similar";
  cfg.n = 20000;
  cfg.alpha = 0.2;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.seed = 99;
  cfg.cadence = 0.25;

  auto r1 = run_homogeneous(cfg);
  auto r2 = run_homogeneous(cfg);
  REQUIRE(r1.series.size() == r2.series.size());
  for (std::size_t i = 0; i < r1.series.size(); ++i) {
    CHECK(std::memcmp(r1.series[i].M.m.data(), r2.series[i].M.m.data(),
                      6 * sizeof(double)) == 0);
    CHECK(r1.series[i].beta == r2.series[i].beta);
  }
  CHECK(r1.coll.executed == r2.coll.executed);

  if (backend::avx2_ops() != nullptr) {
    auto cs = cfg;
    cs.simd = "scalar";
    auto rs = run_homogeneous(cs);
    for (std::size_t i = 0; i < r1.series.size(); ++i)
      CHECK(std::memcmp(r1.series[i].M.m.data(), rs.series[i].M.m.data(),
                        6 * sizeof(double)) == 0);
    backend::select(backend::Kind::auto_detect);
  }
}

TEST_CASE("homogeneous driver: physical frame grows like the moment closure") {
  RunConfig cfg;
  cfg.mode = "homogeneous";
  cfg.n = 50000;
  cfg.alpha = 0.3;
  cfg.dt = 1e-3;
  cfg.t_end = 2.0;
  cfg.seed = 4242;
  cfg.cadence = 0.5;
  auto r = run_homogeneous(cfg);

  REQUIRE(r.series.size() == 5);
  CHECK(r.series.front().t == 0.0);
  for (const auto& row : r.series) CHECK(row.beta == 0.0);  // physical frame

  // ODE solution from the same initial tensor
  auto traj = integrate_moments(r.series.front().M, cfg.alpha, r.b0, 1e-3,
                                cfg.t_end, 0.5);
  REQUIRE(traj.t.size() == r.series.size());
  const double sig = std::sqrt(6.0 / double(cfg.n));  // trace MC error
  for (std::size_t i = 0; i < r.series.size(); ++i)
    CHECK(std::fabs(r.series[i].trace() - traj.M[i].trace()) < 5 * sig);

  CHECK(double(r.coll.executed + r.coll.zero_rel) ==
        doctest::Approx(r.expected_collisions).epsilon(1e-4));
}
