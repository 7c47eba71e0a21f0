#include "usf/dsmc.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "usf/backend.hpp"
#include "usf/errors.hpp"
#include "usf/fitting.hpp"

namespace usf {

void shear_transport_step(ParticleEnsemble& ens, double alpha, double beta,
                          double dt, int threads) {
  const double alpha_dt = alpha * dt;
  const double decay = std::exp(-beta * dt);
  const std::size_t n = ens.size();
  const auto& ops = backend::active();
  if (threads <= 1 || n < 4096) {
    ops.shear_map(ens.v1.data(), ens.v2.data(), ens.v3.data(), n, alpha_dt,
                  decay);
    return;
  }
  const std::size_t t = std::size_t(threads);
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (std::size_t w = 0; w < t; ++w) {
    const std::size_t lo = n * w / t;
    const std::size_t hi = n * (w + 1) / t;
    pool.emplace_back([&, lo, hi] {
      ops.shear_map(ens.v1.data() + lo, ens.v2.data() + lo,
                    ens.v3.data() + lo, hi - lo, alpha_dt, decay);
    });
  }
  for (auto& th : pool) th.join();
}

double dynamic_beta(const ParticleEnsemble& ens, double alpha) {
  return -(alpha / 3.0) * measure_moments(ens).m[1];
}

namespace {

// Poisson counts via inversion for small means, recursive halving above.
std::uint64_t poisson_draw(double lambda, RngStream& rng) {
  std::uint64_t total = 0;
  while (lambda > 32.0) {
    total += poisson_draw(0.5 * lambda, rng);
    lambda *= 0.5;
  }
  const double limit = std::exp(-lambda);
  double prod = rng.uniform();
  std::uint64_t k = 0;
  while (prod > limit) {
    prod *= rng.uniform();
    ++k;
  }
  return total + k;
}

}  // namespace

void collide_pool(std::uint32_t* pool, std::size_t pool_n, double* v1,
                  double* v2, double* v3, double expected_pairs, double& carry,
                  const CollisionKernel& kernel, RngStream& rng,
                  CollisionStats& stats, bool poisson_counts) {
  std::uint64_t n_events;
  if (poisson_counts) {
    n_events = poisson_draw(expected_pairs, rng);
  } else {
    const double target = expected_pairs + carry;
    n_events = static_cast<std::uint64_t>(target);
    carry = target - double(n_events);
  }

  std::size_t avail = pool_n;
  for (std::uint64_t e = 0; e < n_events; ++e) {
    if (avail < 2) {
      // not enough unused particles left; put the rate back into the carry
      const std::uint64_t left = n_events - e;
      stats.rolled_back += left;
      if (!poisson_counts) carry += double(left);
      break;
    }
    const std::size_t a = std::size_t(rng.below(avail));
    const std::uint32_t i = pool[a];
    std::swap(pool[a], pool[--avail]);
    const std::size_t b = std::size_t(rng.below(avail));
    const std::uint32_t j = pool[b];
    std::swap(pool[b], pool[--avail]);

    double vi[3] = {v1[i], v2[i], v3[i]};
    double vj[3] = {v1[j], v2[j], v3[j]};
    double rel[3] = {vj[0] - vi[0], vj[1] - vi[1], vj[2] - vi[2]};
    const double g =
        std::sqrt(rel[0] * rel[0] + rel[1] * rel[1] + rel[2] * rel[2]);
    if (g == 0.0) {
      // grazing/identity collision: Maxwell rate does not depend on g, but
      // the deflection of a zero-relative-velocity pair is a no-op
      ++stats.zero_rel;
      continue;
    }
    for (double& c : rel) c /= g;
    const auto omega = sample_scattering_direction(kernel, rel, rng);
    collide_pair(vi, vj, omega.data());
    v1[i] = vi[0];
    v2[i] = vi[1];
    v3[i] = vi[2];
    v1[j] = vj[0];
    v2[j] = vj[1];
    v3[j] = vj[2];
    ++stats.executed;
  }
}

void collision_step(ParticleEnsemble& ens, const CollisionKernel& kernel,
                    double dt, double& carry, RngStream& rng,
                    CollisionStats& stats, bool poisson_counts) {
  const double rate = dt * kernel.nu0();
  if (!(rate <= 0.5))
    throw GuardError(
        "collision step requires dt*nu0 <= 0.5 (got " + std::to_string(rate) +
            "); reduce run.dt",
        "run.dt");
  const std::size_t n = ens.size();
  static thread_local std::vector<std::uint32_t> pool;
  pool.resize(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = std::uint32_t(i);
  const double expected = 0.5 * double(n) * kernel.nu0() * dt;
  collide_pool(pool.data(), n, ens.v1.data(), ens.v2.data(), ens.v3.data(),
               expected, carry, kernel, rng, stats, poisson_counts);
}

BetaFit measure_beta_from_energy(const std::vector<double>& t,
                                 const std::vector<double>& trace,
                                 double transient_frac, int n_bootstrap,
                                 std::uint64_t boot_seed) {
  if (t.size() != trace.size() || t.size() < 4)
    throw AnalysisError("energy series needs >= 4 samples");
  if (transient_frac < 0.0 || transient_frac >= 1.0)
    throw AnalysisError("transient fraction must lie in [0, 1)");

  const double t0 = t.front() + transient_frac * (t.back() - t.front());
  std::vector<double> ts, ys;
  ts.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0) continue;
    if (!(trace[i] > 0.0))
      throw AnalysisError("trace must be positive to fit log growth");
    ts.push_back(t[i]);
    ys.push_back(std::log(trace[i] / 3.0));
  }
  if (ts.size() < 4) throw AnalysisError("post-transient window too short");

  const LineFit fit = fit_line(ts, ys);

  BetaFit out;
  out.beta_hat = 0.5 * fit.slope;
  out.se = 0.5 * fit.slope_se;
  out.window_t0 = ts.front();
  out.window_t1 = ts.back();
  out.n_points = ts.size();

  const double span = ts.back() - ts.front();
  out.efolds_spanned = out.beta_hat * span;
  out.required_span =
      out.beta_hat > 0.0 ? 5.0 / out.beta_hat
                         : std::numeric_limits<double>::infinity();
  // The 5-efold span rule only binds when growth is actually resolved.
  out.span_ok = !(out.beta_hat > 3.0 * out.se && span < out.required_span &&
                  out.efolds_spanned < 5.0);

  const auto slopes =
      block_bootstrap_slopes(ts, ys, fit, n_bootstrap, boot_seed);
  out.ci_lo = 0.5 * percentile(slopes, 0.025);
  out.ci_hi = 0.5 * percentile(slopes, 0.975);
  return out;
}

}  // namespace usf
