#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "usf/backend.hpp"
#include "usf/errors.hpp"
#include "usf/runs.hpp"

namespace usf {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CsvFile {
  std::FILE* f = nullptr;
  explicit CsvFile(const std::string& path) {
    f = std::fopen(path.c_str(), "w");
    if (f == nullptr)
      throw ConfigError("cannot write '" + path + "'", "output.dir");
  }
  ~CsvFile() {
    if (f != nullptr) std::fclose(f);
  }
  CsvFile(const CsvFile&) = delete;
  CsvFile& operator=(const CsvFile&) = delete;
};

json finite_or_null(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

}  // namespace

void write_series_csv(const std::string& path, const RunResult& r) {
  CsvFile csv(path);
  std::fprintf(csv.f, "t,M11,M12,M13,M22,M23,M33,trace,heat_flux,beta");
  const auto powers = parse_pmoments(r.cfg.pmoments);
  for (int p : powers) std::fprintf(csv.f, ",mom_p%d", p);
  std::fprintf(csv.f, "\n");
  for (const auto& row : r.series) {
    std::fprintf(csv.f,
                 "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                 row.t, row.M.m[0], row.M.m[1], row.M.m[2], row.M.m[3],
                 row.M.m[4], row.M.m[5], row.trace(), row.heat_flux(),
                 row.beta);
    for (double v : row.pmom) std::fprintf(csv.f, ",%.17g", v);
    std::fprintf(csv.f, "\n");
  }
}

SeriesFile read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open series '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("series '" + path + "' is empty");
  SeriesFile sf;
  {
    std::istringstream hs(line);
    std::string col;
    int idx = 0;
    while (std::getline(hs, col, ',')) {
      if (col.rfind("mom_p", 0) == 0)
        sf.pmom_powers.push_back(std::stoi(col.substr(5)));
      else if (idx >= 10)
        throw ConfigError("series '" + path + "': unexpected column '" + col +
                          "'");
      ++idx;
    }
  }
  sf.pmom.resize(sf.pmom_powers.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ls, tok, ',')) vals.push_back(std::stod(tok));
    if (vals.size() != 10 + sf.pmom_powers.size())
      throw ConfigError("series '" + path + "': bad row '" + line + "'");
    sf.t.push_back(vals[0]);
    sf.M.push_back({vals[1], vals[2], vals[3], vals[4], vals[5], vals[6]});
    sf.trace.push_back(vals[7]);
    sf.heat_flux.push_back(vals[8]);
    sf.beta.push_back(vals[9]);
    for (std::size_t k = 0; k < sf.pmom_powers.size(); ++k)
      sf.pmom[k].push_back(vals[10 + k]);
  }
  if (sf.t.empty()) throw ConfigError("series '" + path + "' has no rows");
  return sf;
}

json make_summary(const RunResult& r) {
  const auto& last = r.series.back();
  json j;
  j["mode"] = r.cfg.mode;
  j["n_particles"] = r.cfg.n;
  j["alpha"] = r.cfg.alpha;
  j["dt"] = r.cfg.dt;
  j["t_end"] = r.cfg.t_end;
  j["seed"] = r.cfg.seed;
  j["b0"] = r.b0;
  j["nu0"] = r.nu0;
  j["kernel"] = {{"id", r.cfg.kernel_id},
                 {"amplitude", r.cfg.kernel_amplitude},
                 {"b0", r.b0},
                 {"nu0", r.nu0}};
  j["frame"] = {{"kind", r.cfg.frame_kind},
                {"beta_policy", r.cfg.beta_policy},
                {"beta_value", r.cfg.beta_value}};
  j["splitting"] = r.cfg.splitting;
  j["collisions"] = r.cfg.collisions;
  j["backend"] = backend::active().name;
  j["threads"] = r.cfg.threads;
  j["final"] = {{"t", last.t},
                {"M", last.M.m},
                {"trace", last.trace()},
                {"heat_flux", last.heat_flux()},
                {"beta", last.beta}};
  if (r.beta_fit_ok) {
    j["beta_fit"] = {{"beta_hat", r.beta_fit.beta_hat},
                     {"ci_lo", r.beta_fit.ci_lo},
                     {"ci_hi", r.beta_fit.ci_hi},
                     {"se", r.beta_fit.se},
                     {"window", {r.beta_fit.window_t0, r.beta_fit.window_t1}},
                     {"efolds_spanned", r.beta_fit.efolds_spanned},
                     {"required_span", finite_or_null(r.beta_fit.required_span)},
                     {"span_ok", r.beta_fit.span_ok},
                     {"n_points", r.beta_fit.n_points}};
  } else {
    j["beta_fit"] = nullptr;
  }
  j["collision_stats"] = {{"executed", r.coll.executed},
                          {"zero_rel", r.coll.zero_rel},
                          {"rolled_back", r.coll.rolled_back},
                          {"expected_uniform", r.expected_collisions}};
  if (r.cfg.mode == "inhomogeneous" && !r.modes.empty()) {
    std::vector<double> abs_final;
    for (const auto& c : r.modes.back().rho) abs_final.push_back(std::abs(c));
    j["spatial"] = {{"n_cells", r.cfg.n_cells},
                    {"L", r.cfg.length},
                    {"perturb_mode_k", r.cfg.perturb_mode_k},
                    {"perturb_amplitude", r.cfg.perturb_amplitude},
                    {"final_mode_abs", abs_final}};
  }
  j["wall_time_s"] = r.wall_seconds;
  return j;
}

void write_run_outputs(RunResult& r) {
  const fs::path dir(r.cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw ConfigError("cannot create output dir '" + dir.string() + "': " +
                          ec.message(),
                      "output.dir");

  write_series_csv((dir / "series.csv").string(), r);

  {
    std::ofstream cfg_out(dir / "config_resolved.cfg");
    cfg_out << config_render_resolved(r.cfg);
  }
  {
    std::ofstream sum(dir / "summary.json");
    sum << make_summary(r).dump(2) << "\n";
  }

  if (!r.modes.empty()) {
    CsvFile csv((dir / "modes.csv").string());
    std::fprintf(csv.f, "t,k,abs_rho,arg_rho\n");
    for (const auto& row : r.modes)
      for (std::size_t k = 0; k < row.rho.size(); ++k)
        std::fprintf(csv.f, "%.17g,%zu,%.17g,%.17g\n", row.t, k,
                     std::abs(row.rho[k]), std::arg(row.rho[k]));
  }
  if (!r.cells.empty()) {
    CsvFile csv((dir / "cells.csv").string());
    std::fprintf(csv.f, "t,cell,count,u1,u2,u3,trace\n");
    for (const auto& row : r.cells)
      for (std::size_t c = 0; c < row.cells.size(); ++c) {
        const auto& cm = row.cells[c];
        std::fprintf(csv.f, "%.17g,%zu,%u,%.17g,%.17g,%.17g,%.17g\n", row.t, c,
                     cm.count, cm.u[0], cm.u[1], cm.u[2], cm.trace);
      }
  }
  if (r.cfg.hist_enable && r.hist.n_samples > 0) {
    r.hist.write_csv((dir / "hist_v1v2.csv").string());
    r.hist_speed.write_csv((dir / "hist_speed.csv").string());
  }
  if (!r.final_speeds.empty()) {
    CsvFile csv((dir / "speeds_final.csv").string());
    std::fprintf(csv.f, "speed\n");
    for (double s : r.final_speeds) std::fprintf(csv.f, "%.17g\n", s);
  }
  r.out_dir_used = dir.string();
}

}  // namespace usf
