#include "usf/histogram.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "usf/errors.hpp"

namespace usf {

Histogram2D::Histogram2D(int bins_, double lo_, double hi_)
    : bins(bins_), lo(lo_), hi(hi_) {
  if (bins < 2 || !(hi > lo))
    throw ConfigError("histogram needs >= 2 bins and hi > lo",
                      "output.hist.bins");
  counts.assign(std::size_t(bins) * std::size_t(bins), 0.0);
}

void Histogram2D::accumulate(const ParticleEnsemble& ens) {
  const double scale = double(bins) / (hi - lo);
  const std::size_t n = ens.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double a = (ens.v1[k] - lo) * scale;
    const double b = (ens.v2[k] - lo) * scale;
    if (a < 0.0 || b < 0.0 || a >= double(bins) || b >= double(bins)) {
      ++n_overflow;
      continue;
    }
    counts[std::size_t(a) * std::size_t(bins) + std::size_t(b)] += 1.0;
  }
  n_samples += n;
  ++n_frames;
}

double Histogram2D::mass(int i, int j) const {
  return counts[std::size_t(i) * std::size_t(bins) + std::size_t(j)] /
         double(n_samples);
}

void Histogram2D::write_csv(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr)
    throw ConfigError("cannot write histogram '" + path + "'", "output.dir");
  std::fprintf(f, "# bins=%d lo=%.17g hi=%.17g n_samples=%llu n_overflow=%llu n_frames=%llu\n",
               bins, lo, hi, (unsigned long long)n_samples,
               (unsigned long long)n_overflow, (unsigned long long)n_frames);
  // `count` is authoritative (mass = count/n_samples does not round-trip)
  std::fprintf(f, "i,j,v1_lo,v1_hi,v2_lo,v2_hi,count,mass\n");
  const double w = bin_width();
  for (int i = 0; i < bins; ++i)
    for (int j = 0; j < bins; ++j)
      std::fprintf(f, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, j,
                   lo + i * w, lo + (i + 1) * w, lo + j * w, lo + (j + 1) * w,
                   counts[std::size_t(i) * std::size_t(bins) + std::size_t(j)],
                   mass(i, j));
  std::fclose(f);
}

Histogram2D Histogram2D::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open histogram '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("# bins=", 0) != 0)
    throw ConfigError("histogram '" + path + "': missing metadata header");
  Histogram2D h;
  unsigned long long ns = 0, ov = 0, nf = 0;
  if (std::sscanf(line.c_str(),
                  "# bins=%d lo=%lg hi=%lg n_samples=%llu n_overflow=%llu n_frames=%llu",
                  &h.bins, &h.lo, &h.hi, &ns, &ov, &nf) != 6)
    throw ConfigError("histogram '" + path + "': bad metadata header");
  h.n_samples = ns;
  h.n_overflow = ov;
  h.n_frames = nf;
  h.counts.assign(std::size_t(h.bins) * std::size_t(h.bins), 0.0);
  std::getline(in, line);  // column header
  int i, j;
  double a, b, c, d, cnt, m;
  while (std::getline(in, line)) {
    if (std::sscanf(line.c_str(), "%d,%d,%lg,%lg,%lg,%lg,%lg,%lg", &i, &j, &a,
                    &b, &c, &d, &cnt, &m) != 8)
      throw ConfigError("histogram '" + path + "': bad row '" + line + "'");
    if (i < 0 || i >= h.bins || j < 0 || j >= h.bins)
      throw ConfigError("histogram '" + path + "': bin index out of range");
    h.counts[std::size_t(i) * std::size_t(h.bins) + std::size_t(j)] = cnt;
  }
  return h;
}

HistogramSpeed::HistogramSpeed(int bins_, double hi_) : bins(bins_), hi(hi_) {
  if (bins < 2 || !(hi > 0.0))
    throw ConfigError("speed histogram needs >= 2 bins and hi > 0",
                      "output.hist.bins");
  counts.assign(std::size_t(bins), 0.0);
}

void HistogramSpeed::accumulate(const ParticleEnsemble& ens) {
  const double scale = double(bins) / hi;
  const std::size_t n = ens.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::sqrt(ens.v1[k] * ens.v1[k] + ens.v2[k] * ens.v2[k] +
                               ens.v3[k] * ens.v3[k]) *
                     scale;
    if (s >= double(bins)) {
      ++n_overflow;
      continue;
    }
    counts[std::size_t(s)] += 1.0;
  }
  n_samples += n;
  ++n_frames;
}

void HistogramSpeed::write_csv(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr)
    throw ConfigError("cannot write histogram '" + path + "'", "output.dir");
  std::fprintf(f, "# bins=%d hi=%.17g n_samples=%llu n_overflow=%llu n_frames=%llu\n",
               bins, hi, (unsigned long long)n_samples,
               (unsigned long long)n_overflow, (unsigned long long)n_frames);
  std::fprintf(f, "speed_lo,speed_hi,count,mass\n");
  const double w = hi / double(bins);
  for (int i = 0; i < bins; ++i)
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", i * w, (i + 1) * w,
                 counts[std::size_t(i)],
                 counts[std::size_t(i)] / double(n_samples));
  std::fclose(f);
}

}  // namespace usf
