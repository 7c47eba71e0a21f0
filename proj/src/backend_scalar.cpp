#include <cmath>
#include <cstddef>

#include "usf/backend.hpp"

// Scalar reference backend. Loops are written op-for-op like the AVX2 code
// (explicit fma, striped accumulators folded in a fixed order) so the two
// backends agree bit for bit, not just to round-off.

namespace usf::backend {
namespace {

void shear_map_scalar(double* v1, double* v2, double* v3, std::size_t n,
                      double alpha_dt, double decay) {
  for (std::size_t i = 0; i < n; ++i) {
    v1[i] = decay * std::fma(-alpha_dt, v2[i], v1[i]);
    v2[i] = decay * v2[i];
    v3[i] = decay * v3[i];
  }
}

void advect_periodic_scalar(double* x, const double* v1, const double* v2,
                            std::size_t n, double c1, double c2, double L,
                            double inv_L) {
  for (std::size_t i = 0; i < n; ++i) {
    double xi = std::fma(c1, v1[i], x[i]);
    xi = std::fma(c2, v2[i], xi);
    const double w = std::floor(xi * inv_L);
    xi = std::fma(-w, L, xi);
    xi -= (xi >= L) ? L : 0.0;  // floor-wrap can land exactly on L
    xi += (xi < 0.0) ? L : 0.0;
    x[i] = xi;
  }
}

inline double fold4(const double a[4]) { return (a[0] + a[1]) + (a[2] + a[3]); }

void second_moment_sums_scalar(const double* v1, const double* v2,
                               const double* v3, std::size_t n,
                               double out[6]) {
  double acc[6][4] = {};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t s = i & 3;
    acc[0][s] = std::fma(v1[i], v1[i], acc[0][s]);
    acc[1][s] = std::fma(v1[i], v2[i], acc[1][s]);
    acc[2][s] = std::fma(v1[i], v3[i], acc[2][s]);
    acc[3][s] = std::fma(v2[i], v2[i], acc[3][s]);
    acc[4][s] = std::fma(v2[i], v3[i], acc[4][s]);
    acc[5][s] = std::fma(v3[i], v3[i], acc[5][s]);
  }
  for (int k = 0; k < 6; ++k) out[k] = fold4(acc[k]);
}

void second_moment_square_sums_scalar(const double* v1, const double* v2,
                                      const double* v3, std::size_t n,
                                      double out[6]) {
  double acc[6][4] = {};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t s = i & 3;
    const double p11 = v1[i] * v1[i];
    const double p12 = v1[i] * v2[i];
    const double p13 = v1[i] * v3[i];
    const double p22 = v2[i] * v2[i];
    const double p23 = v2[i] * v3[i];
    const double p33 = v3[i] * v3[i];
    acc[0][s] = std::fma(p11, p11, acc[0][s]);
    acc[1][s] = std::fma(p12, p12, acc[1][s]);
    acc[2][s] = std::fma(p13, p13, acc[2][s]);
    acc[3][s] = std::fma(p22, p22, acc[3][s]);
    acc[4][s] = std::fma(p23, p23, acc[4][s]);
    acc[5][s] = std::fma(p33, p33, acc[5][s]);
  }
  for (int k = 0; k < 6; ++k) out[k] = fold4(acc[k]);
}

// |v|^p for integer p >= 1 via square-and-multiply on r2 = |v|^2, one sqrt
// for odd p. The AVX2 variant runs the same op sequence on vectors.
inline double radial_power(double r2, int p) {
  double result = 1.0;
  double base = r2;
  int e = p >> 1;
  while (e != 0) {
    if (e & 1) result *= base;
    base *= base;
    e >>= 1;
  }
  if (p & 1) result *= std::sqrt(r2);
  return result;
}

void radial_power_sums_scalar(const double* v1, const double* v2,
                              const double* v3, std::size_t n, const int* pows,
                              int n_pows, double* out) {
  constexpr int kMaxPows = 16;
  double acc[kMaxPows][4] = {};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t s = i & 3;
    const double r2 =
        std::fma(v1[i], v1[i], std::fma(v2[i], v2[i], v3[i] * v3[i]));
    for (int k = 0; k < n_pows; ++k) acc[k][s] += radial_power(r2, pows[k]);
  }
  for (int k = 0; k < n_pows; ++k) out[k] = fold4(acc[k]);
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops = {
      "scalar",
      shear_map_scalar,
      advect_periodic_scalar,
      second_moment_sums_scalar,
      second_moment_square_sums_scalar,
      radial_power_sums_scalar,
  };
  return ops;
}

}  // namespace usf::backend
