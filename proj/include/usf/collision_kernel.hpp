#pragma once

#include <array>
#include <string>
#include <vector>

#include "usf/rng.hpp"

namespace usf {

// Angular collision kernel B0(z), z = cos(theta) between the relative
// velocity and the scattering direction, for a Maxwell gas (collision rate
// independent of |v - v*|). Admissible kernels satisfy the cutoff bound
// 0 <= B0(z) <= C|z| on [-1, 1] and are not identically zero.
//
// Two derived constants drive everything downstream:
//   b0  = 3*pi * Int_{-1}^{1} B0(z) z^2 (1 - z^2) dz   (second-moment relaxation rate / 2)
//   nu0 = 2*pi * Int_{-1}^{1} B0(z) dz                 (per-particle collision frequency)
// Both scale linearly with the kernel amplitude.
class CollisionKernel {
 public:
  enum class Id { cutoff_maxwell, tabulated };

  // B0(z) = amplitude * |z|
  static CollisionKernel cutoff_maxwell(double amplitude = 1.0);

  // piecewise-linear B0 through (z, value) knots; grid must cover [-1, 1]
  static CollisionKernel tabulated(std::vector<double> z,
                                   std::vector<double> value,
                                   double amplitude = 1.0);

  // whitespace/comma-separated "z value" rows, '#' comments
  static CollisionKernel from_table_file(const std::string& path,
                                         double amplitude = 1.0);

  Id id() const { return id_; }
  double amplitude() const { return amplitude_; }
  double b0() const { return b0_; }
  double nu0() const { return nu0_; }
  double cutoff_constant() const { return cutoff_c_; }

  double eval(double z) const;

  // z = cos(theta) with density proportional to B0(z); one uniform draw
  double sample_z(RngStream& rng) const;

  const std::vector<double>& grid_z() const { return grid_z_; }

 private:
  CollisionKernel() = default;
  void finalize();  // validates cutoff bound, computes b0/nu0 and the CDF

  Id id_ = Id::cutoff_maxwell;
  double amplitude_ = 1.0;
  double b0_ = 0.0;
  double nu0_ = 0.0;
  double cutoff_c_ = 0.0;
  std::vector<double> grid_z_, grid_v_;  // tabulated only
  std::vector<double> cdf_;              // knot CDF of B0, normalized to 1
};

// Fresh quadrature of the defining integrals (the kernel caches them at
// construction; these exist so tests can cross-check the cached values).
double compute_b0(const CollisionKernel& k);
double compute_nu0(const CollisionKernel& k);

// Hard-sphere-style velocity exchange along omega:
//   v' = v + ((w - v).omega) omega,  w' = w - ((w - v).omega) omega
// w' is formed as (v + w) - v', so the momentum error per component is a
// single rounding of the pair sum (about one ulp, zero bias, independent of
// the impulse size); energy is conserved to round-off.
void collide_pair(double v[3], double w[3], const double omega[3]);

// Unit scattering direction with cos(theta) ~ B0 and uniform azimuth about
// rel_dir (which must be unit length). Consumes exactly two uniforms.
std::array<double, 3> sample_scattering_direction(const CollisionKernel& k,
                                                  const double rel_dir[3],
                                                  RngStream& rng);

// Leading small-shear growth rate alpha^2 / (6 b0).
double predicted_beta_leading(double alpha, double b0);

// First-order distribution correction G1 = -(1/(2 b0)) v1 v2 sqrt(mu)
// evaluated pointwise, mu the standard Maxwellian.
double g1_value(const double v[3], double b0);

}  // namespace usf
