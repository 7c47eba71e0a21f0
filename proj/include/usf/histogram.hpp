#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "usf/ensemble.hpp"

namespace usf {

// Accumulating 2-D (xi1, xi2) velocity histogram. Masses are normalized on
// read-out: sum over bins plus the out-of-range overflow equals 1.
struct Histogram2D {
  int bins = 0;
  double lo = 0.0, hi = 0.0;  // same range on both axes
  std::vector<double> counts;            // bins*bins, row-major in xi1
  std::uint64_t n_samples = 0;           // accumulated over frames
  std::uint64_t n_overflow = 0;
  std::uint64_t n_frames = 0;

  Histogram2D() = default;
  Histogram2D(int bins_, double lo_, double hi_);

  void accumulate(const ParticleEnsemble& ens);
  double bin_width() const { return (hi - lo) / double(bins); }
  double mass(int i, int j) const;  // counts / n_samples

  void write_csv(const std::string& path) const;
  static Histogram2D read_csv(const std::string& path);
};

// 1-D speed histogram |xi|, same conventions.
struct HistogramSpeed {
  int bins = 0;
  double hi = 0.0;
  std::vector<double> counts;
  std::uint64_t n_samples = 0;
  std::uint64_t n_overflow = 0;
  std::uint64_t n_frames = 0;

  HistogramSpeed() = default;
  HistogramSpeed(int bins_, double hi_);
  void accumulate(const ParticleEnsemble& ens);
  void write_csv(const std::string& path) const;
};

}  // namespace usf
