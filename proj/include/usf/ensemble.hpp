#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "usf/moments.hpp"
#include "usf/rng.hpp"

namespace usf {

// Particle ensemble, structure-of-arrays. x is empty for velocity-only
// (spatially homogeneous) runs.
struct ParticleEnsemble {
  std::vector<double> x;
  std::vector<double> v1, v2, v3;
  double t = 0.0;

  std::size_t size() const { return v1.size(); }
};

// N standard-normal velocities per component, then the sample mean is
// subtracted so total momentum is exactly zero; `stretch` scales each
// component afterwards (anisotropic initial data), preserving the zero mean.
void init_maxwellian(ParticleEnsemble& ens, std::size_t n, RngStream& rng,
                     const std::array<double, 3>& stretch = {1.0, 1.0, 1.0});

void init_positions_uniform(ParticleEnsemble& ens, double L, RngStream& rng);

// Rejection-sample x against density proportional to
// 1 + eps*cos(2 pi k x / L); requires 0 <= eps < 1.
void init_positions_perturbed(ParticleEnsemble& ens, double L, int mode_k,
                              double eps, RngStream& rng);

// Ensemble-averaged second moments <xi_i xi_j> via the active backend.
MomentState measure_moments(const ParticleEnsemble& ens);

// Per-component variance estimates Var(xi_i xi_j) (for Monte Carlo error
// bars: sigma_ij = sqrt(var_ij / N)).
std::array<double, 6> measure_moment_variances(const ParticleEnsemble& ens);

// <|xi|^p> for each requested power.
std::vector<double> measure_radial_moments(const ParticleEnsemble& ens,
                                           const std::vector<int>& pows);

}  // namespace usf
