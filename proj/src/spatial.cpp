#include "usf/spatial.hpp"

#include <cmath>
#include <string>
#include <thread>

#include "usf/backend.hpp"
#include "usf/errors.hpp"

namespace usf {

CellGrid::CellGrid(int n_cells, double L) : n_cells_(n_cells), L_(L) {
  if (n_cells < 1) throw ConfigError("need >= 1 cell", "spatial.n_cells");
  if (!(L > 0.0)) throw ConfigError("domain length must be > 0", "spatial.L");
  offsets_.assign(std::size_t(n_cells) + 1, 0);
}

void CellGrid::bin(const std::vector<double>& x) {
  const std::size_t n = x.size();
  const double scale = double(n_cells_) / L_;
  order_.resize(n);
  fill_.assign(std::size_t(n_cells_), 0);
  offsets_.assign(std::size_t(n_cells_) + 1, 0);

  auto cell_of = [&](double xi) {
    int c = int(xi * scale);
    return std::uint32_t(std::clamp(c, 0, n_cells_ - 1));
  };
  for (std::size_t i = 0; i < n; ++i) ++offsets_[cell_of(x[i]) + 1];
  for (int c = 0; c < n_cells_; ++c) offsets_[c + 1] += offsets_[c];
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t c = cell_of(x[i]);
    order_[offsets_[c] + fill_[c]++] = std::uint32_t(i);
  }
}

void spatial_transport_step(ParticleEnsemble& ens, double L, double alpha,
                            double beta, double scale, double dt,
                            int threads) {
  const std::size_t n = ens.size();
  if (ens.x.size() != n)
    throw ConfigError("ensemble has no positions; spatial step needs them");
  const double c1 = scale * dt;
  const double c2 = -0.5 * scale * alpha * dt * dt;
  const auto& ops = backend::active();
  const double inv_L = 1.0 / L;
  // positions advance with the pre-step velocities, then velocities map
  if (threads <= 1 || n < 4096) {
    ops.advect_periodic(ens.x.data(), ens.v1.data(), ens.v2.data(), n, c1, c2,
                        L, inv_L);
  } else {
    const std::size_t t = std::size_t(threads);
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (std::size_t w = 0; w < t; ++w) {
      const std::size_t lo = n * w / t;
      const std::size_t hi = n * (w + 1) / t;
      pool.emplace_back([&, lo, hi] {
        ops.advect_periodic(ens.x.data() + lo, ens.v1.data() + lo,
                            ens.v2.data() + lo, hi - lo, c1, c2, L, inv_L);
      });
    }
    for (auto& th : pool) th.join();
  }
  shear_transport_step(ens, alpha, beta, dt, threads);
}

void per_cell_collision_step(ParticleEnsemble& ens, CellGrid& grid,
                             const CollisionKernel& kernel, double dt,
                             std::vector<double>& carry, RngStream& rng,
                             CollisionStats& stats, bool poisson_counts) {
  const std::size_t n = ens.size();
  const int n_cells = grid.n_cells();
  if (carry.size() != std::size_t(n_cells))
    carry.assign(std::size_t(n_cells), 0.0);

  grid.bin(ens.x);

  std::uint32_t n_max = 0;
  for (int c = 0; c < n_cells; ++c) n_max = std::max(n_max, grid.count(c));
  const double peak_rate =
      dt * kernel.nu0() * double(n_max) * double(n_cells) / double(n);
  if (!(peak_rate <= 0.5))
    throw GuardError("cell collision rate guard: dt*nu0*n_c*n_cells/N = " +
                         std::to_string(peak_rate) +
                         " > 0.5 in the densest cell; reduce run.dt",
                     "run.dt");

  // grid.order() is rebuilt each step, so it can double as the draw pool;
  // collide_pool only permutes within each cell's span
  auto& pool = grid.order();
  const double rate_factor =
      kernel.nu0() * dt * double(n_cells) / (2.0 * double(n));
  for (int c = 0; c < n_cells; ++c) {
    const std::uint32_t nc = grid.count(c);
    if (nc < 2) continue;
    const double expected = rate_factor * double(nc) * double(nc);
    collide_pool(pool.data() + grid.offsets()[c], nc, ens.v1.data(),
                 ens.v2.data(), ens.v3.data(), expected, carry[std::size_t(c)],
                 kernel, rng, stats, poisson_counts);
  }
}

std::vector<std::complex<double>> spatial_mode_amplitudes(
    const ParticleEnsemble& ens, double L, int k_max) {
  const std::size_t n = ens.size();
  std::vector<std::complex<double>> modes(std::size_t(k_max) + 1);
  modes[0] = {1.0, 0.0};  // exact by normalization
  const double w0 = 2.0 * 3.141592653589793238462643383279 / L;
  for (int k = 1; k <= k_max; ++k) {
    double re = 0.0, im = 0.0;
    const double wk = w0 * double(k);
    for (std::size_t i = 0; i < n; ++i) {
      re += std::cos(wk * ens.x[i]);
      im -= std::sin(wk * ens.x[i]);
    }
    modes[std::size_t(k)] = {re / double(n), im / double(n)};
  }
  return modes;
}

std::vector<CellMoments> measure_cell_moments(const ParticleEnsemble& ens,
                                              CellGrid& grid) {
  grid.bin(ens.x);
  std::vector<CellMoments> out(std::size_t(grid.n_cells()));
  for (int c = 0; c < grid.n_cells(); ++c) {
    CellMoments& cm = out[std::size_t(c)];
    cm.count = grid.count(c);
    if (cm.count == 0) continue;
    for (std::uint32_t k = grid.offsets()[c]; k < grid.offsets()[c + 1]; ++k) {
      const std::uint32_t i = grid.order()[k];
      cm.u[0] += ens.v1[i];
      cm.u[1] += ens.v2[i];
      cm.u[2] += ens.v3[i];
    }
    for (double& u : cm.u) u /= double(cm.count);
    for (std::uint32_t k = grid.offsets()[c]; k < grid.offsets()[c + 1]; ++k) {
      const std::uint32_t i = grid.order()[k];
      const double d1 = ens.v1[i] - cm.u[0];
      const double d2 = ens.v2[i] - cm.u[1];
      const double d3 = ens.v3[i] - cm.u[2];
      cm.trace += d1 * d1 + d2 * d2 + d3 * d3;
    }
    cm.trace /= double(cm.count);
  }
  return out;
}

}  // namespace usf
