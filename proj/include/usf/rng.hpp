#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace usf {

// Independent substream ids derived from one user seed. Keeping the purposes
// on separate streams lets runs that differ only in one aspect (e.g. spatial
// vs. homogeneous) share identical velocity histories.
enum class rng_purpose : std::uint64_t {
  velocity_init = 1,
  position_init = 2,
  collisions = 3,
  analysis = 4,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// mt19937_64 with hand-written output mappings. <random> distributions are
// implementation-defined, which would tie the byte-identical-output contract
// to one libstdc++ version; these mappings pin it to the engine alone.
class RngStream {
 public:
  RngStream(std::uint64_t seed, rng_purpose purpose)
      : eng_(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(purpose)))) {}

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // uniform in [0, n) without modulo bias
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

  // standard normal, Box-Muller, second value cached
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace usf
