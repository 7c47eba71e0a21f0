#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "usf/collision_kernel.hpp"
#include "usf/dsmc.hpp"
#include "usf/ensemble.hpp"

namespace usf {

// 1-D periodic slab [0, L) split into equal cells, velocity space unbounded.
// Collisions are Maxwell-rate within each cell; transport advects x with the
// exact characteristic and applies the homogeneous velocity map.
class CellGrid {
 public:
  CellGrid(int n_cells, double L);

  int n_cells() const { return n_cells_; }
  double L() const { return L_; }

  // stable counting sort of particle indices by cell; cell c occupies
  // [offsets[c], offsets[c+1]) of `order`
  void bin(const std::vector<double>& x);
  const std::vector<std::uint32_t>& order() const { return order_; }
  std::vector<std::uint32_t>& order() { return order_; }
  const std::vector<std::uint32_t>& offsets() const { return offsets_; }
  std::uint32_t count(int c) const { return offsets_[c + 1] - offsets_[c]; }

 private:
  int n_cells_;
  double L_;
  std::vector<std::uint32_t> order_, offsets_, fill_;
};

// Position advance over [t, t+dt] along the exact characteristic,
//   x += scale * (dt*xi1 - (alpha/2) dt^2 xi2),  wrapped into [0, L),
// followed by the homogeneous velocity map. `scale` is the accumulated frame
// dilation exp(Int_0^t beta); pass exp(beta*t) for constant beta, 1 at beta=0.
void spatial_transport_step(ParticleEnsemble& ens, double L, double alpha,
                            double beta, double scale, double dt,
                            int threads = 0);

// One collision sweep over all cells (ascending cell order, particles in
// stable index order). Expected pairs in cell c: n_c^2 * n_cells * nu0 * dt /
// (2 N); uniform density reproduces the homogeneous rate. `carry` holds one
// fractional event per cell. Guard: dt * nu0 * max_c(n_c * n_cells / N) <=
// 0.5. A single cell reproduces collision_step exactly.
void per_cell_collision_step(ParticleEnsemble& ens, CellGrid& grid,
                             const CollisionKernel& kernel, double dt,
                             std::vector<double>& carry, RngStream& rng,
                             CollisionStats& stats, bool poisson_counts = false);

// Normalized density modes rho_k = (1/N) sum_j exp(-2 pi i k x_j / L) for
// k = 0..k_max (rho_0 == 1 exactly).
std::vector<std::complex<double>> spatial_mode_amplitudes(
    const ParticleEnsemble& ens, double L, int k_max);

// Per-cell diagnostics row: count, mean velocity, second moment about the
// cell mean.
struct CellMoments {
  std::uint32_t count = 0;
  double u[3] = {0, 0, 0};
  double trace = 0.0;
};

std::vector<CellMoments> measure_cell_moments(const ParticleEnsemble& ens,
                                              CellGrid& grid);

}  // namespace usf
