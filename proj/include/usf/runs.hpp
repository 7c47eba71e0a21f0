#pragma once

#include <complex>
#include <string>
#include <vector>

#include "json.hpp"
#include "usf/collision_kernel.hpp"
#include "usf/config.hpp"
#include "usf/dsmc.hpp"
#include "usf/histogram.hpp"
#include "usf/spatial.hpp"

namespace usf {

struct SeriesRow {
  double t = 0.0;
  MomentState M;
  double beta = 0.0;               // frame rate in effect at this time
  std::array<double, 6> var{};     // Var(xi_i xi_j), for MC error bars
  std::vector<double> pmom;        // <|xi|^p> per configured power
  double trace() const { return M.trace(); }
  double heat_flux() const { return M.m[1]; }
};

struct ModesRow {
  double t = 0.0;
  std::vector<std::complex<double>> rho;  // k = 0..modes_max
};

struct CellsRow {
  double t = 0.0;
  std::vector<CellMoments> cells;
};

struct RunResult {
  RunConfig cfg;  // resolved
  double b0 = 0.0, nu0 = 0.0;
  std::vector<SeriesRow> series;
  std::vector<ModesRow> modes;
  std::vector<CellsRow> cells;
  Histogram2D hist;            // populated when output.hist.enable
  HistogramSpeed hist_speed;
  std::vector<double> final_speeds;  // populated when output.speeds
  CollisionStats coll;
  double expected_collisions = 0.0;
  BetaFit beta_fit;
  bool beta_fit_ok = false;
  double wall_seconds = 0.0;
  std::string out_dir_used;  // empty when nothing was written
};

CollisionKernel make_kernel(const RunConfig& cfg);

// Drivers. Validate the config, run, optionally write the output set
// (when cfg.out_dir is non-empty): series.csv, summary.json,
// config_resolved.cfg, plus modes.csv/cells.csv (inhomogeneous),
// hist_*.csv, speeds_final.csv when enabled.
RunResult run_homogeneous(RunConfig cfg);    // physical or self-similar frame
RunResult run_inhomogeneous(RunConfig cfg);  // 1-D periodic cells

nlohmann::json make_summary(const RunResult& r);
void write_run_outputs(RunResult& r);  // fills r.out_dir_used

// series.csv helpers shared by the CLI and analyze
void write_series_csv(const std::string& path, const RunResult& r);

struct SeriesFile {
  std::vector<double> t;
  std::vector<std::array<double, 6>> M;
  std::vector<double> trace, heat_flux, beta;
  std::vector<int> pmom_powers;
  std::vector<std::vector<double>> pmom;  // per power
};
SeriesFile read_series_csv(const std::string& path);

}  // namespace usf
