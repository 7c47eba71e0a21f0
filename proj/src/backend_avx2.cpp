#include "usf/backend.hpp"

#ifdef USF_HAVE_AVX2_BACKEND

#include <immintrin.h>

#include <cmath>
#include <cstddef>

// AVX2+FMA backend. Element i lives in lane i%4, tails are folded into the
// matching stripe with scalar ops identical to the reference backend, and the
// four partial sums are combined in the same fixed order, so results are
// bit-identical to backend_scalar.cpp.

namespace usf::backend {
namespace {

void shear_map_avx2(double* v1, double* v2, double* v3, std::size_t n,
                    double alpha_dt, double decay) {
  const __m256d va = _mm256_set1_pd(alpha_dt);
  const __m256d vd = _mm256_set1_pd(decay);
  const std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d a = _mm256_loadu_pd(v1 + i);
    const __m256d b = _mm256_loadu_pd(v2 + i);
    const __m256d c = _mm256_loadu_pd(v3 + i);
    _mm256_storeu_pd(v1 + i, _mm256_mul_pd(vd, _mm256_fnmadd_pd(va, b, a)));
    _mm256_storeu_pd(v2 + i, _mm256_mul_pd(vd, b));
    _mm256_storeu_pd(v3 + i, _mm256_mul_pd(vd, c));
  }
  for (std::size_t i = n4; i < n; ++i) {
    v1[i] = decay * std::fma(-alpha_dt, v2[i], v1[i]);
    v2[i] = decay * v2[i];
    v3[i] = decay * v3[i];
  }
}

void advect_periodic_avx2(double* x, const double* v1, const double* v2,
                          std::size_t n, double c1, double c2, double L,
                          double inv_L) {
  const __m256d vc1 = _mm256_set1_pd(c1);
  const __m256d vc2 = _mm256_set1_pd(c2);
  const __m256d vL = _mm256_set1_pd(L);
  const __m256d vinvL = _mm256_set1_pd(inv_L);
  const __m256d vzero = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    __m256d xi = _mm256_loadu_pd(x + i);
    xi = _mm256_fmadd_pd(vc1, _mm256_loadu_pd(v1 + i), xi);
    xi = _mm256_fmadd_pd(vc2, _mm256_loadu_pd(v2 + i), xi);
    const __m256d w = _mm256_floor_pd(_mm256_mul_pd(xi, vinvL));
    xi = _mm256_fnmadd_pd(w, vL, xi);
    const __m256d ge = _mm256_cmp_pd(xi, vL, _CMP_GE_OQ);
    xi = _mm256_sub_pd(xi, _mm256_and_pd(ge, vL));
    const __m256d lt = _mm256_cmp_pd(xi, vzero, _CMP_LT_OQ);
    xi = _mm256_add_pd(xi, _mm256_and_pd(lt, vL));
    _mm256_storeu_pd(x + i, xi);
  }
  for (std::size_t i = n4; i < n; ++i) {
    double xi = std::fma(c1, v1[i], x[i]);
    xi = std::fma(c2, v2[i], xi);
    const double w = std::floor(xi * inv_L);
    xi = std::fma(-w, L, xi);
    xi -= (xi >= L) ? L : 0.0;
    xi += (xi < 0.0) ? L : 0.0;
    x[i] = xi;
  }
}

inline double fold4(const double a[4]) { return (a[0] + a[1]) + (a[2] + a[3]); }

void second_moment_sums_avx2(const double* v1, const double* v2,
                             const double* v3, std::size_t n, double out[6]) {
  __m256d acc[6];
  for (auto& a : acc) a = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d a = _mm256_loadu_pd(v1 + i);
    const __m256d b = _mm256_loadu_pd(v2 + i);
    const __m256d c = _mm256_loadu_pd(v3 + i);
    acc[0] = _mm256_fmadd_pd(a, a, acc[0]);
    acc[1] = _mm256_fmadd_pd(a, b, acc[1]);
    acc[2] = _mm256_fmadd_pd(a, c, acc[2]);
    acc[3] = _mm256_fmadd_pd(b, b, acc[3]);
    acc[4] = _mm256_fmadd_pd(b, c, acc[4]);
    acc[5] = _mm256_fmadd_pd(c, c, acc[5]);
  }
  double lanes[6][4];
  for (int k = 0; k < 6; ++k) _mm256_storeu_pd(lanes[k], acc[k]);
  for (std::size_t i = n4; i < n; ++i) {
    const std::size_t s = i & 3;
    lanes[0][s] = std::fma(v1[i], v1[i], lanes[0][s]);
    lanes[1][s] = std::fma(v1[i], v2[i], lanes[1][s]);
    lanes[2][s] = std::fma(v1[i], v3[i], lanes[2][s]);
    lanes[3][s] = std::fma(v2[i], v2[i], lanes[3][s]);
    lanes[4][s] = std::fma(v2[i], v3[i], lanes[4][s]);
    lanes[5][s] = std::fma(v3[i], v3[i], lanes[5][s]);
  }
  for (int k = 0; k < 6; ++k) out[k] = fold4(lanes[k]);
}

void second_moment_square_sums_avx2(const double* v1, const double* v2,
                                    const double* v3, std::size_t n,
                                    double out[6]) {
  __m256d acc[6];
  for (auto& a : acc) a = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d a = _mm256_loadu_pd(v1 + i);
    const __m256d b = _mm256_loadu_pd(v2 + i);
    const __m256d c = _mm256_loadu_pd(v3 + i);
    const __m256d p11 = _mm256_mul_pd(a, a);
    const __m256d p12 = _mm256_mul_pd(a, b);
    const __m256d p13 = _mm256_mul_pd(a, c);
    const __m256d p22 = _mm256_mul_pd(b, b);
    const __m256d p23 = _mm256_mul_pd(b, c);
    const __m256d p33 = _mm256_mul_pd(c, c);
    acc[0] = _mm256_fmadd_pd(p11, p11, acc[0]);
    acc[1] = _mm256_fmadd_pd(p12, p12, acc[1]);
    acc[2] = _mm256_fmadd_pd(p13, p13, acc[2]);
    acc[3] = _mm256_fmadd_pd(p22, p22, acc[3]);
    acc[4] = _mm256_fmadd_pd(p23, p23, acc[4]);
    acc[5] = _mm256_fmadd_pd(p33, p33, acc[5]);
  }
  double lanes[6][4];
  for (int k = 0; k < 6; ++k) _mm256_storeu_pd(lanes[k], acc[k]);
  for (std::size_t i = n4; i < n; ++i) {
    const std::size_t s = i & 3;
    const double p11 = v1[i] * v1[i];
    const double p12 = v1[i] * v2[i];
    const double p13 = v1[i] * v3[i];
    const double p22 = v2[i] * v2[i];
    const double p23 = v2[i] * v3[i];
    const double p33 = v3[i] * v3[i];
    lanes[0][s] = std::fma(p11, p11, lanes[0][s]);
    lanes[1][s] = std::fma(p12, p12, lanes[1][s]);
    lanes[2][s] = std::fma(p13, p13, lanes[2][s]);
    lanes[3][s] = std::fma(p22, p22, lanes[3][s]);
    lanes[4][s] = std::fma(p23, p23, lanes[4][s]);
    lanes[5][s] = std::fma(p33, p33, lanes[5][s]);
  }
  for (int k = 0; k < 6; ++k) out[k] = fold4(lanes[k]);
}

inline __m256d radial_power_v(__m256d r2, int p) {
  __m256d result = _mm256_set1_pd(1.0);
  __m256d base = r2;
  int e = p >> 1;
  while (e != 0) {
    if (e & 1) result = _mm256_mul_pd(result, base);
    base = _mm256_mul_pd(base, base);
    e >>= 1;
  }
  if (p & 1) result = _mm256_mul_pd(result, _mm256_sqrt_pd(r2));
  return result;
}

inline double radial_power_s(double r2, int p) {
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

void radial_power_sums_avx2(const double* v1, const double* v2,
                            const double* v3, std::size_t n, const int* pows,
                            int n_pows, double* out) {
  constexpr int kMaxPows = 16;
  __m256d acc[kMaxPows];
  for (int k = 0; k < n_pows; ++k) acc[k] = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d a = _mm256_loadu_pd(v1 + i);
    const __m256d b = _mm256_loadu_pd(v2 + i);
    const __m256d c = _mm256_loadu_pd(v3 + i);
    const __m256d r2 =
        _mm256_fmadd_pd(a, a, _mm256_fmadd_pd(b, b, _mm256_mul_pd(c, c)));
    for (int k = 0; k < n_pows; ++k)
      acc[k] = _mm256_add_pd(acc[k], radial_power_v(r2, pows[k]));
  }
  double lanes[kMaxPows][4];
  for (int k = 0; k < n_pows; ++k) _mm256_storeu_pd(lanes[k], acc[k]);
  for (std::size_t i = n4; i < n; ++i) {
    const std::size_t s = i & 3;
    const double r2 =
        std::fma(v1[i], v1[i], std::fma(v2[i], v2[i], v3[i] * v3[i]));
    for (int k = 0; k < n_pows; ++k) lanes[k][s] += radial_power_s(r2, pows[k]);
  }
  for (int k = 0; k < n_pows; ++k) out[k] = fold4(lanes[k]);
}

const Ops avx2_table = {
    "avx2",
    shear_map_avx2,
    advect_periodic_avx2,
    second_moment_sums_avx2,
    second_moment_square_sums_avx2,
    radial_power_sums_avx2,
};

}  // namespace

namespace detail {
const Ops* avx2_table_ptr() { return &avx2_table; }
}  // namespace detail

}  // namespace usf::backend

#endif  // USF_HAVE_AVX2_BACKEND
