#include "usf/ensemble.hpp"

#include <cmath>

#include "usf/backend.hpp"
#include "usf/errors.hpp"

namespace usf {

void init_maxwellian(ParticleEnsemble& ens, std::size_t n, RngStream& rng,
                     const std::array<double, 3>& stretch) {
  if (n < 2) throw ConfigError("need at least 2 particles", "run.N");
  ens.v1.resize(n);
  ens.v2.resize(n);
  ens.v3.resize(n);
  ens.t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ens.v1[i] = rng.normal();
    ens.v2[i] = rng.normal();
    ens.v3[i] = rng.normal();
  }
  double* comps[3] = {ens.v1.data(), ens.v2.data(), ens.v3.data()};
  for (int c = 0; c < 3; ++c) {
    if (!(std::isfinite(stretch[c]) && stretch[c] > 0.0))
      throw ConfigError("init.stretch entries must be positive", "init.stretch");
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += comps[c][i];
    mean /= double(n);
    for (std::size_t i = 0; i < n; ++i)
      comps[c][i] = (comps[c][i] - mean) * stretch[c];
  }
}

void init_positions_uniform(ParticleEnsemble& ens, double L, RngStream& rng) {
  const std::size_t n = ens.size();
  ens.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) ens.x[i] = L * rng.uniform();
}

void init_positions_perturbed(ParticleEnsemble& ens, double L, int mode_k,
                              double eps, RngStream& rng) {
  if (!(L > 0.0))
    throw ConfigError("domain length must be positive", "spatial.L");
  if (eps < 0.0 || eps >= 1.0)
    throw ConfigError("perturbation amplitude must lie in [0, 1)",
                      "spatial.perturb.amplitude");
  if (mode_k < 1)
    throw ConfigError("perturbation mode must be >= 1",
                      "spatial.perturb.mode_k");
  if (eps == 0.0) {
    init_positions_uniform(ens, L, rng);
    return;
  }
  const std::size_t n = ens.size();
  ens.x.resize(n);
  const double two_pi_k = 2.0 * 3.141592653589793238462643383279 * mode_k / L;
  const double ceiling = 1.0 + eps;
  for (std::size_t i = 0; i < n; ++i) {
    for (;;) {
      const double x = L * rng.uniform();
      const double accept = (1.0 + eps * std::cos(two_pi_k * x)) / ceiling;
      if (rng.uniform() < accept) {
        ens.x[i] = x;
        break;
      }
    }
  }
}

MomentState measure_moments(const ParticleEnsemble& ens) {
  double sums[6];
  backend::active().second_moment_sums(ens.v1.data(), ens.v2.data(),
                                       ens.v3.data(), ens.size(), sums);
  MomentState M;
  for (int k = 0; k < 6; ++k) M.m[k] = sums[k] / double(ens.size());
  return M;
}

std::array<double, 6> measure_moment_variances(const ParticleEnsemble& ens) {
  const std::size_t n = ens.size();
  double sums[6], sq[6];
  backend::active().second_moment_sums(ens.v1.data(), ens.v2.data(),
                                       ens.v3.data(), n, sums);
  backend::active().second_moment_square_sums(ens.v1.data(), ens.v2.data(),
                                              ens.v3.data(), n, sq);
  std::array<double, 6> var;
  for (int k = 0; k < 6; ++k) {
    const double mean = sums[k] / double(n);
    var[k] = std::max(0.0, sq[k] / double(n) - mean * mean);
  }
  return var;
}

std::vector<double> measure_radial_moments(const ParticleEnsemble& ens,
                                           const std::vector<int>& pows) {
  if (pows.empty()) return {};
  if (pows.size() > 16)
    throw ConfigError("at most 16 radial moment powers supported",
                      "output.pmoments");
  for (int p : pows)
    if (p < 1)
      throw ConfigError("radial moment powers must be >= 1", "output.pmoments");
  std::vector<double> out(pows.size());
  backend::active().radial_power_sums(ens.v1.data(), ens.v2.data(),
                                      ens.v3.data(), ens.size(), pows.data(),
                                      int(pows.size()), out.data());
  for (double& v : out) v /= double(ens.size());
  return out;
}

}  // namespace usf
