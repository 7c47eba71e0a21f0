#include "usf/collision_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "usf/errors.hpp"
#include "usf/quadrature.hpp"

namespace usf {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kQuadTol = 1e-12;

}  // namespace

CollisionKernel CollisionKernel::cutoff_maxwell(double amplitude) {
  CollisionKernel k;
  k.id_ = Id::cutoff_maxwell;
  k.amplitude_ = amplitude;
  k.finalize();
  return k;
}

CollisionKernel CollisionKernel::tabulated(std::vector<double> z,
                                           std::vector<double> value,
                                           double amplitude) {
  CollisionKernel k;
  k.id_ = Id::tabulated;
  k.amplitude_ = amplitude;
  k.grid_z_ = std::move(z);
  k.grid_v_ = std::move(value);
  k.finalize();
  return k;
}

CollisionKernel CollisionKernel::from_table_file(const std::string& path,
                                                 double amplitude) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open kernel table '" + path + "'",
                      "kernel.table_path");
  std::vector<double> zs, vs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double z, v;
    if (!(row >> z)) continue;  // blank / comment-only line
    if (!(row >> v))
      throw ConfigError("kernel table '" + path + "' line " +
                            std::to_string(lineno) + ": expected 'z value'",
                        "kernel.table_path");
    zs.push_back(z);
    vs.push_back(v);
  }
  return tabulated(std::move(zs), std::move(vs), amplitude);
}

double CollisionKernel::eval(double z) const {
  if (id_ == Id::cutoff_maxwell) return amplitude_ * std::abs(z);
  const double zc = std::clamp(z, grid_z_.front(), grid_z_.back());
  const auto it = std::upper_bound(grid_z_.begin(), grid_z_.end(), zc);
  const std::size_t hi =
      std::clamp<std::size_t>(std::size_t(it - grid_z_.begin()), 1,
                              grid_z_.size() - 1);
  const std::size_t lo = hi - 1;
  const double t = (zc - grid_z_[lo]) / (grid_z_[hi] - grid_z_[lo]);
  return amplitude_ * (grid_v_[lo] + t * (grid_v_[hi] - grid_v_[lo]));
}

void CollisionKernel::finalize() {
  if (!(amplitude_ > 0.0) || !std::isfinite(amplitude_))
    throw ConfigError("kernel amplitude must be positive and finite",
                      "kernel.amplitude");

  if (id_ == Id::tabulated) {
    if (grid_z_.size() < 2 || grid_z_.size() != grid_v_.size())
      throw ConfigError("kernel table needs >= 2 (z, value) rows",
                        "kernel.table_path");
    for (std::size_t i = 0; i + 1 < grid_z_.size(); ++i)
      if (!(grid_z_[i] < grid_z_[i + 1]))
        throw ConfigError("kernel table z grid must be strictly increasing",
                          "kernel.table_path");
    if (std::abs(grid_z_.front() + 1.0) > 1e-12 ||
        std::abs(grid_z_.back() - 1.0) > 1e-12)
      throw ConfigError("kernel table must span z in [-1, 1]",
                        "kernel.table_path");
    double vmax = 0.0;
    for (double v : grid_v_) {
      if (!std::isfinite(v) || v < 0.0)
        throw ConfigError("kernel table values must be finite and >= 0",
                          "kernel.table_path");
      vmax = std::max(vmax, v);
    }
    // The cutoff bound B0(z) <= C|z| forces B0(0) = 0.
    if (eval(0.0) > 1e-12 * std::max(1.0, amplitude_ * vmax))
      throw ConfigError(
          "kernel violates the cutoff bound B0(z) <= C|z|: B0(0) != 0",
          "kernel.table_path");
    cutoff_c_ = 0.0;
    for (std::size_t i = 0; i < grid_z_.size(); ++i)
      if (grid_z_[i] != 0.0)
        cutoff_c_ = std::max(
            cutoff_c_, amplitude_ * grid_v_[i] / std::abs(grid_z_[i]));

    // knot CDF for inverse sampling (linear density per segment)
    cdf_.assign(grid_z_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < grid_z_.size(); ++i)
      cdf_[i + 1] = cdf_[i] + 0.5 * (grid_v_[i] + grid_v_[i + 1]) *
                                  (grid_z_[i + 1] - grid_z_[i]);
    const double total = cdf_.back();
    if (!(total > 0.0))
      throw ConfigError("kernel is identically zero", "kernel.table_path");
    for (double& c : cdf_) c /= total;
  } else {
    cutoff_c_ = amplitude_;
  }

  b0_ = compute_b0(*this);
  nu0_ = compute_nu0(*this);
  if (!(b0_ > 0.0))
    throw ConfigError("kernel is (numerically) zero: b0 must be positive",
                      "kernel.id");
}

double CollisionKernel::sample_z(RngStream& rng) const {
  if (id_ == Id::cutoff_maxwell) {
    // density |z|/1: inverse CDF of the folded half gives sqrt
    const double w = 2.0 * rng.uniform() - 1.0;
    return std::copysign(std::sqrt(std::abs(w)), w);
  }
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const std::size_t hi =
      std::clamp<std::size_t>(std::size_t(it - cdf_.begin()), 1,
                              cdf_.size() - 1);
  const std::size_t lo = hi - 1;
  const double dz = grid_z_[hi] - grid_z_[lo];
  const double b_lo = grid_v_[lo];
  const double slope = (grid_v_[hi] - grid_v_[lo]) / dz;
  // un-normalized mass still to place inside this segment
  const double total = 0.5 * (grid_v_[lo] + grid_v_[hi]) * dz / (cdf_[hi] - cdf_[lo]);
  const double m = (u - cdf_[lo]) * total;
  double t;
  if (std::abs(slope) * dz < 1e-14 * std::max(b_lo, 1e-300)) {
    t = m / b_lo;
  } else {
    const double disc = std::max(0.0, b_lo * b_lo + 2.0 * slope * m);
    t = (std::sqrt(disc) - b_lo) / slope;
  }
  return std::clamp(grid_z_[lo] + t, grid_z_[lo], grid_z_[hi]);
}

double compute_b0(const CollisionKernel& k) {
  auto f = [&k](double z) { return k.eval(z) * z * z * (1.0 - z * z); };
  const std::vector<double> brk =
      k.id() == CollisionKernel::Id::tabulated ? k.grid_z()
                                               : std::vector<double>{0.0};
  return 3.0 * kPi * adaptive_gauss_legendre_split(f, -1.0, 1.0, brk, kQuadTol);
}

double compute_nu0(const CollisionKernel& k) {
  auto f = [&k](double z) { return k.eval(z); };
  const std::vector<double> brk =
      k.id() == CollisionKernel::Id::tabulated ? k.grid_z()
                                               : std::vector<double>{0.0};
  return 2.0 * kPi * adaptive_gauss_legendre_split(f, -1.0, 1.0, brk, kQuadTol);
}

void collide_pair(double v[3], double w[3], const double omega[3]) {
  const double sum[3] = {v[0] + w[0], v[1] + w[1], v[2] + w[2]};
  const double h = (w[0] - v[0]) * omega[0] + (w[1] - v[1]) * omega[1] +
                   (w[2] - v[2]) * omega[2];
  for (int i = 0; i < 3; ++i) {
    v[i] = std::fma(h, omega[i], v[i]);
    w[i] = sum[i] - v[i];  // exact momentum conservation by construction
  }
}

std::array<double, 3> sample_scattering_direction(const CollisionKernel& k,
                                                  const double rel_dir[3],
                                                  RngStream& rng) {
  const double z = k.sample_z(rng);
  const double phi = 2.0 * kPi * rng.uniform();

  // tangent frame about rel_dir, seeded from its least-aligned axis
  const double ax = std::abs(rel_dir[0]);
  const double ay = std::abs(rel_dir[1]);
  const double az = std::abs(rel_dir[2]);
  double a[3] = {0.0, 0.0, 0.0};
  if (ax <= ay && ax <= az)
    a[0] = 1.0;
  else if (ay <= az)
    a[1] = 1.0;
  else
    a[2] = 1.0;

  double e1[3] = {rel_dir[1] * a[2] - rel_dir[2] * a[1],
                  rel_dir[2] * a[0] - rel_dir[0] * a[2],
                  rel_dir[0] * a[1] - rel_dir[1] * a[0]};
  const double n1 =
      std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
  for (double& c : e1) c /= n1;
  const double e2[3] = {rel_dir[1] * e1[2] - rel_dir[2] * e1[1],
                        rel_dir[2] * e1[0] - rel_dir[0] * e1[2],
                        rel_dir[0] * e1[1] - rel_dir[1] * e1[0]};

  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double cs = std::cos(phi) * s;
  const double sn = std::sin(phi) * s;
  return {z * rel_dir[0] + cs * e1[0] + sn * e2[0],
          z * rel_dir[1] + cs * e1[1] + sn * e2[1],
          z * rel_dir[2] + cs * e1[2] + sn * e2[2]};
}

double predicted_beta_leading(double alpha, double b0) {
  if (!(b0 > 0.0)) throw ConfigError("b0 must be positive");
  return alpha * alpha / (6.0 * b0);
}

double g1_value(const double v[3], double b0) {
  if (!(b0 > 0.0)) throw ConfigError("b0 must be positive");
  const double v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
  const double sqrt_mu = std::pow(2.0 * kPi, -0.75) * std::exp(-0.25 * v2);
  return -v[0] * v[1] * sqrt_mu / (2.0 * b0);
}

}  // namespace usf
