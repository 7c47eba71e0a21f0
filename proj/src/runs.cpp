#include "usf/runs.hpp"

#include <chrono>
#include <cmath>

#include "usf/backend.hpp"
#include "usf/errors.hpp"

namespace usf {
namespace {

struct Recorder {
  const RunConfig& cfg;
  std::vector<int> powers;
  double hist_t0;
  RunResult& out;

  Recorder(const RunConfig& c, RunResult& r) : cfg(c), out(r) {
    powers = parse_pmoments(c.pmoments);
    hist_t0 = c.hist_t_start >= 0.0 ? c.hist_t_start : 0.5 * c.t_end;
    if (c.hist_enable) {
      out.hist = Histogram2D(c.hist_bins, -c.hist_range, c.hist_range);
      out.hist_speed = HistogramSpeed(c.hist_bins, c.hist_range);
    }
  }

  void snapshot(const ParticleEnsemble& ens, double t, double beta) {
    SeriesRow row;
    row.t = t;
    row.M = measure_moments(ens);
    row.beta = beta;
    row.var = measure_moment_variances(ens);
    if (!powers.empty()) row.pmom = measure_radial_moments(ens, powers);
    out.series.push_back(std::move(row));
    if (cfg.hist_enable && t >= hist_t0) {
      out.hist.accumulate(ens);
      out.hist_speed.accumulate(ens);
    }
  }

  void finish(const ParticleEnsemble& ens) {
    if (cfg.out_speeds) {
      out.final_speeds.resize(ens.size());
      for (std::size_t i = 0; i < ens.size(); ++i)
        out.final_speeds[i] =
            std::sqrt(ens.v1[i] * ens.v1[i] + ens.v2[i] * ens.v2[i] +
                      ens.v3[i] * ens.v3[i]);
    }
    std::vector<double> ts, tr;
    ts.reserve(out.series.size());
    for (const auto& row : out.series) {
      ts.push_back(row.t);
      tr.push_back(row.trace());
    }
    try {
      out.beta_fit = measure_beta_from_energy(ts, tr);
      out.beta_fit_ok = true;
    } catch (const AnalysisError&) {
      out.beta_fit_ok = false;  // short series; summary just omits the fit
    }
  }
};

long long step_count(double t_end, double dt) {
  return std::llround(std::ceil(t_end / dt - 1e-9));
}

long long record_stride(double cadence, double dt) {
  return std::max(1LL, std::llround(cadence / dt));
}

}  // namespace

CollisionKernel make_kernel(const RunConfig& cfg) {
  if (cfg.kernel_id == "tabulated")
    return CollisionKernel::from_table_file(cfg.kernel_table_path,
                                            cfg.kernel_amplitude);
  return CollisionKernel::cutoff_maxwell(cfg.kernel_amplitude);
}

RunResult run_homogeneous(RunConfig cfg) {
  config_validate(cfg);
  if (cfg.mode != "homogeneous" && cfg.mode != "self_similar")
    throw ConfigError("run_homogeneous expects run.mode homogeneous or "
                      "self_similar",
                      "run.mode");
  const auto t_begin = std::chrono::steady_clock::now();
  backend::select(backend::parse_kind(cfg.simd));

  RunResult out;
  out.cfg = cfg;
  const CollisionKernel kernel = make_kernel(cfg);
  out.b0 = kernel.b0();
  out.nu0 = kernel.nu0();

  RngStream vel_rng(cfg.seed, rng_purpose::velocity_init);
  RngStream coll_rng(cfg.seed, rng_purpose::collisions);
  ParticleEnsemble ens;
  init_maxwellian(ens, std::size_t(cfg.n), vel_rng, cfg.init_stretch);

  const bool dynamic = cfg.beta_policy == "dynamic";
  const bool strang = cfg.splitting == "strang";
  const bool poisson = cfg.collisions == "poisson";
  double beta = cfg.beta_policy == "fixed" ? cfg.beta_value : 0.0;

  Recorder rec(cfg, out);
  rec.snapshot(ens, 0.0, dynamic ? dynamic_beta(ens, cfg.alpha) : beta);

  const long long n_steps = step_count(cfg.t_end, cfg.dt);
  const long long stride = record_stride(cfg.cadence, cfg.dt);
  double carry = 0.0;
  for (long long step = 1; step <= n_steps; ++step) {
    if (dynamic) beta = dynamic_beta(ens, cfg.alpha);
    if (strang) {
      shear_transport_step(ens, cfg.alpha, beta, 0.5 * cfg.dt, cfg.threads);
      collision_step(ens, kernel, cfg.dt, carry, coll_rng, out.coll, poisson);
      shear_transport_step(ens, cfg.alpha, beta, 0.5 * cfg.dt, cfg.threads);
    } else {
      shear_transport_step(ens, cfg.alpha, beta, cfg.dt, cfg.threads);
      collision_step(ens, kernel, cfg.dt, carry, coll_rng, out.coll, poisson);
    }
    ens.t = double(step) * cfg.dt;
    if (step % stride == 0 || step == n_steps) rec.snapshot(ens, ens.t, beta);
  }
  out.expected_collisions =
      0.5 * double(cfg.n) * kernel.nu0() * cfg.dt * double(n_steps);
  rec.finish(ens);

  out.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t_begin)
                         .count();
  if (!cfg.out_dir.empty()) write_run_outputs(out);
  return out;
}

RunResult run_inhomogeneous(RunConfig cfg) {
  config_validate(cfg);
  if (cfg.mode != "inhomogeneous")
    throw ConfigError("run_inhomogeneous expects run.mode inhomogeneous",
                      "run.mode");
  const auto t_begin = std::chrono::steady_clock::now();
  backend::select(backend::parse_kind(cfg.simd));

  RunResult out;
  out.cfg = cfg;
  const CollisionKernel kernel = make_kernel(cfg);
  out.b0 = kernel.b0();
  out.nu0 = kernel.nu0();

  RngStream vel_rng(cfg.seed, rng_purpose::velocity_init);
  RngStream pos_rng(cfg.seed, rng_purpose::position_init);
  RngStream coll_rng(cfg.seed, rng_purpose::collisions);
  ParticleEnsemble ens;
  init_maxwellian(ens, std::size_t(cfg.n), vel_rng, cfg.init_stretch);
  init_positions_perturbed(ens, cfg.length, cfg.perturb_mode_k,
                           cfg.perturb_amplitude, pos_rng);

  CellGrid grid(cfg.n_cells, cfg.length);
  std::vector<double> carry(std::size_t(cfg.n_cells), 0.0);

  const bool dynamic = cfg.beta_policy == "dynamic";
  const bool strang = cfg.splitting == "strang";
  const bool poisson = cfg.collisions == "poisson";
  double beta = cfg.beta_policy == "fixed" ? cfg.beta_value : 0.0;
  double log_scale = 0.0;  // accumulated Int beta dt (frame dilation)

  Recorder rec(cfg, out);
  auto snapshot_spatial = [&](double t, double b) {
    rec.snapshot(ens, t, b);
    ModesRow mr;
    mr.t = t;
    mr.rho = spatial_mode_amplitudes(ens, cfg.length, cfg.modes_max);
    out.modes.push_back(std::move(mr));
    if (cfg.out_cells) {
      CellsRow cr;
      cr.t = t;
      cr.cells = measure_cell_moments(ens, grid);
      out.cells.push_back(std::move(cr));
    }
  };
  snapshot_spatial(0.0, dynamic ? dynamic_beta(ens, cfg.alpha) : beta);

  const long long n_steps = step_count(cfg.t_end, cfg.dt);
  const long long stride = record_stride(cfg.cadence, cfg.dt);
  for (long long step = 1; step <= n_steps; ++step) {
    if (dynamic) beta = dynamic_beta(ens, cfg.alpha);
    if (strang) {
      spatial_transport_step(ens, cfg.length, cfg.alpha, beta,
                             std::exp(log_scale), 0.5 * cfg.dt, cfg.threads);
      log_scale += beta * 0.5 * cfg.dt;
      per_cell_collision_step(ens, grid, kernel, cfg.dt, carry, coll_rng,
                              out.coll, poisson);
      spatial_transport_step(ens, cfg.length, cfg.alpha, beta,
                             std::exp(log_scale), 0.5 * cfg.dt, cfg.threads);
      log_scale += beta * 0.5 * cfg.dt;
    } else {
      spatial_transport_step(ens, cfg.length, cfg.alpha, beta,
                             std::exp(log_scale), cfg.dt, cfg.threads);
      log_scale += beta * cfg.dt;
      per_cell_collision_step(ens, grid, kernel, cfg.dt, carry, coll_rng,
                              out.coll, poisson);
    }
    ens.t = double(step) * cfg.dt;
    if (step % stride == 0 || step == n_steps)
      snapshot_spatial(ens.t, beta);
  }
  out.expected_collisions =
      0.5 * double(cfg.n) * kernel.nu0() * cfg.dt * double(n_steps);
  rec.finish(ens);

  out.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t_begin)
                         .count();
  if (!cfg.out_dir.empty()) write_run_outputs(out);
  return out;
}

}  // namespace usf
