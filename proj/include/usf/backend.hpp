#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace usf::backend {

// Hot array kernels, runtime-dispatched between a scalar reference and an
// AVX2 variant. Both are written so results match bit for bit: identical
// per-element operations (fma where fma), and reductions accumulate into four
// stripes (element i -> stripe i%4, matching the AVX2 lanes) that are folded
// in a fixed order.
struct Ops {
  const char* name;

  // v1 <- decay*(v1 - alpha_dt*v2); v2 <- decay*v2; v3 <- decay*v3
  void (*shear_map)(double* v1, double* v2, double* v3, std::size_t n,
                    double alpha_dt, double decay);

  // x <- wrap(x + c1*v1 + c2*v2) into [0, L)
  void (*advect_periodic)(double* x, const double* v1, const double* v2,
                          std::size_t n, double c1, double c2, double L,
                          double inv_L);

  // out = sums of [v1v1, v1v2, v1v3, v2v2, v2v3, v3v3]
  void (*second_moment_sums)(const double* v1, const double* v2,
                             const double* v3, std::size_t n, double out[6]);

  // out = sums of the squares of the same six products (variance estimates)
  void (*second_moment_square_sums)(const double* v1, const double* v2,
                                    const double* v3, std::size_t n,
                                    double out[6]);

  // out[k] = sum_i |v_i|^pows[k]; pows are positive integers
  void (*radial_power_sums)(const double* v1, const double* v2,
                            const double* v3, std::size_t n, const int* pows,
                            int n_pows, double* out);
};

enum class Kind { auto_detect, scalar, avx2 };

const Ops& scalar_ops();
const Ops* avx2_ops();  // null when not compiled in or not supported by the CPU

// Process-wide selection. select() throws ConfigError for an unavailable
// backend; active() resolves auto_detect to the best available.
void select(Kind k);
Kind selected();
const Ops& active();
Kind parse_kind(const std::string& name);  // "auto" | "scalar" | "avx2"
std::vector<std::string> available_names();

}  // namespace usf::backend
