// usfsim: uniform shear flow kinetics driver.
//
// Subcommands:
//   predict        closed-form self-similar profile for given alpha, b0
//   moments        integrate the second-moment closure ODE (CSV out)
//   homogeneous    DSMC, physical frame (energy grows)
//   self-similar   DSMC in the rescaled frame (energy pinned)
//   inhomogeneous  DSMC with 1-D periodic cells
//   analyze        post-process a run directory into report.json
//
// Exit codes: 0 ok, 2 config error, 3 stability guard tripped, 4 analysis
// could not produce a trustworthy result. Errors go to stderr as JSON.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "usf/analysis.hpp"
#include "usf/backend.hpp"
#include "usf/errors.hpp"
#include "usf/moments.hpp"
#include "usf/runs.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct RunCli {
  std::string config_path;
  std::vector<std::string> sets;
  long long n = 0;
  double alpha = 0, dt = 0, t_end = 0, cadence = 0;
  std::uint64_t seed = 0;
  std::string out_dir;
};

void add_run_options(CLI::App* sub, RunCli& rc) {
  sub->add_option("--config", rc.config_path, "config file (key = value lines)");
  sub->add_option("--set", rc.sets,
                  "override a config key, e.g. --set run.dt=5e-4 (repeatable)");
  sub->add_option("--n", rc.n, "particles (run.N)");
  sub->add_option("--alpha", rc.alpha, "shear rate (run.alpha)");
  sub->add_option("--dt", rc.dt, "time step (run.dt)");
  sub->add_option("--t-end", rc.t_end, "final time (run.t_end)");
  sub->add_option("--seed", rc.seed, "RNG seed (run.seed)");
  sub->add_option("--out", rc.out_dir, "output directory (output.dir)");
  sub->add_option("--cadence", rc.cadence, "recording cadence (output.cadence)");
}

usf::RunConfig build_config(const CLI::App* sub, const RunCli& rc,
                            const std::string& mode) {
  usf::RunConfig cfg;
  cfg.mode = mode;
  if (!rc.config_path.empty()) usf::config_load_file(cfg, rc.config_path);
  for (const auto& kv : rc.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw usf::ConfigError("--set expects key=value, got '" + kv + "'");
    usf::config_apply(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (sub->count("--n")) cfg.n = rc.n;
  if (sub->count("--alpha")) cfg.alpha = rc.alpha;
  if (sub->count("--dt")) cfg.dt = rc.dt;
  if (sub->count("--t-end")) cfg.t_end = rc.t_end;
  if (sub->count("--seed")) cfg.seed = rc.seed;
  if (sub->count("--out")) cfg.out_dir = rc.out_dir;
  if (sub->count("--cadence")) cfg.cadence = rc.cadence;
  if (cfg.out_dir.empty()) {
    const char* root = std::getenv("USF_OUTPUT_ROOT");
    fs::path base = (root != nullptr && *root != '\0') ? fs::path(root)
                                                       : fs::path("runs");
    cfg.out_dir = (base / (mode + "-" + std::to_string(cfg.seed))).string();
  }
  return cfg;
}

void print_run_summary(const usf::RunResult& r) {
  const auto& last = r.series.back();
  std::printf("mode=%s n=%lld alpha=%g dt=%g t_end=%g seed=%llu backend=%s\n",
              r.cfg.mode.c_str(), r.cfg.n, r.cfg.alpha, r.cfg.dt, r.cfg.t_end,
              static_cast<unsigned long long>(r.cfg.seed),
              usf::backend::active().name);
  std::printf("kernel %s amplitude=%g: b0=%.12g nu0=%.12g\n",
              r.cfg.kernel_id.c_str(), r.cfg.kernel_amplitude, r.b0, r.nu0);
  std::printf("final t=%g trace=%.12g M12=%.12g beta=%.12g\n", last.t,
              last.trace(), last.M.m[1], last.beta);
  if (r.beta_fit_ok)
    std::printf("beta_hat=%.6g [%.6g, %.6g] over t in [%g, %g]\n",
                r.beta_fit.beta_hat, r.beta_fit.ci_lo, r.beta_fit.ci_hi,
                r.beta_fit.window_t0, r.beta_fit.window_t1);
  std::printf("collisions executed=%llu expected(uniform)=%.6g\n",
              static_cast<unsigned long long>(r.coll.executed),
              r.expected_collisions);
  std::printf("wall %.2fs, outputs in %s\n", r.wall_seconds,
              r.out_dir_used.c_str());
}

int cmd_predict(double alpha, double b0) {
  if (!(b0 > 0) || !std::isfinite(b0))
    throw usf::ConfigError("predict requires b0 > 0");
  if (!std::isfinite(alpha))
    throw usf::ConfigError("predict requires finite alpha");
  auto sol = usf::growth_rate_exact(alpha, b0);
  json j;
  j["alpha"] = alpha;
  j["b0"] = b0;
  j["s"] = sol.s;
  j["beta"] = sol.beta;
  j["beta_leading"] = usf::predicted_beta_leading(alpha, b0);
  j["residual"] = sol.residual;
  j["M_steady"] = {{"M11", sol.steady.m[0]}, {"M12", sol.steady.m[1]},
                   {"M13", sol.steady.m[2]}, {"M22", sol.steady.m[3]},
                   {"M23", sol.steady.m[4]}, {"M33", sol.steady.m[5]}};
  std::cout << j.dump(2) << "\n";
  return usf::exit_ok;
}

int cmd_moments(double alpha, double b0, double dt, double t_end,
                double cadence, const std::string& m0_csv, bool rescaled,
                double beta, const std::string& out_path) {
  usf::MomentState m0 = usf::MomentState::isotropic();
  if (!m0_csv.empty()) {
    std::istringstream ss(m0_csv);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (vals.size() != 6)
      throw usf::ConfigError(
          "--m0 expects 6 values M11,M12,M13,M22,M23,M33, got " +
          std::to_string(vals.size()));
    std::copy(vals.begin(), vals.end(), m0.m.begin());
  }
  auto traj =
      usf::integrate_moments(m0, alpha, b0, dt, t_end, cadence, rescaled, beta);
  std::FILE* f = stdout;
  if (!out_path.empty()) {
    f = std::fopen(out_path.c_str(), "w");
    if (f == nullptr)
      throw usf::ConfigError("cannot write '" + out_path + "'");
  }
  std::fprintf(f, "t,M11,M12,M13,M22,M23,M33,trace\n");
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    const auto& m = traj.M[i].m;
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                 traj.t[i], m[0], m[1], m[2], m[3], m[4], m[5],
                 traj.M[i].trace());
  }
  if (f != stdout) std::fclose(f);
  return usf::exit_ok;
}

std::vector<double> read_speeds_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usf::ConfigError("cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> out;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(std::stod(line));
  return out;
}

int cmd_analyze(const std::string& run_dir, std::string out_path,
                int weight_exponent, double k_fraction, double transient_frac,
                double min_efolds, bool no_span_check, int n_boot) {
  const fs::path dir(run_dir);
  json summary;
  {
    std::ifstream in(dir / "summary.json");
    if (!in)
      throw usf::ConfigError("no summary.json in '" + run_dir + "'",
                             "analyze.run");
    in >> summary;
  }
  const double alpha = summary.at("alpha").get<double>();
  const double b0 = summary.at("b0").get<double>();
  auto series = usf::read_series_csv((dir / "series.csv").string());

  json report;
  report["run_dir"] = run_dir;
  report["mode"] = summary.value("mode", std::string());
  report["alpha"] = alpha;
  report["b0"] = b0;

  auto fit = usf::measure_beta_from_energy(series.t, series.trace,
                                           transient_frac, n_boot);
  // The e-fold span gate protects exponential-rate fits in the physical
  // frame. In the rescaled frame energy is pinned and the fitted rate is a
  // residual drift, so "e-folds of growth" is not a meaningful yardstick.
  const bool rescaled_frame =
      summary.contains("frame") &&
      summary["frame"].value("kind", std::string()) == "self_similar";
  const bool significant = fit.beta_hat > 3.0 * fit.se;
  if (!no_span_check && !rescaled_frame && significant &&
      fit.efolds_spanned < min_efolds) {
    char hint[160];
    std::snprintf(hint, sizeof hint,
                  "window spans %.2f e-folds of energy growth, need %.2f: "
                  "extend run to t_end >= %.1f or pass --no-span-check",
                  fit.efolds_spanned, min_efolds,
                  min_efolds / fit.beta_hat + fit.window_t0);
    throw usf::AnalysisError(hint, "run.t_end");
  }
  report["beta_fit"] = {{"beta_hat", fit.beta_hat},
                        {"ci_lo", fit.ci_lo},
                        {"ci_hi", fit.ci_hi},
                        {"se", fit.se},
                        {"window", {fit.window_t0, fit.window_t1}},
                        {"efolds_spanned", fit.efolds_spanned},
                        {"n_points", fit.n_points}};
  {
    auto exact = usf::growth_rate_exact(alpha, b0);
    report["beta_fit"]["beta_exact"] = exact.beta;
    report["beta_fit"]["beta_leading"] = usf::predicted_beta_leading(alpha, b0);
  }

  std::vector<double> m12(series.M.size());
  for (std::size_t i = 0; i < series.M.size(); ++i) m12[i] = series.M[i][1];
  auto flux = usf::first_order_flux_check(series.t, m12, alpha, b0);
  report["flux"] = {{"measured", flux.measured},
                    {"sigma", flux.sigma},
                    {"first_order", flux.first_order},
                    {"exact", flux.exact},
                    {"gap_first", flux.gap_first},
                    {"gap_exact", flux.gap_exact},
                    {"gap_predictions", flux.gap_predictions},
                    {"n_points", flux.n_points}};

  const fs::path hist_path = dir / "hist_v1v2.csv";
  if (fs::exists(hist_path)) {
    auto hist = usf::Histogram2D::read_csv(hist_path.string());
    auto pd = usf::weighted_profile_distance(hist, alpha, b0, weight_exponent);
    report["profile"] = {{"distance", pd.distance},
                         {"ref_alpha2", pd.ref_alpha2},
                         {"argmax", {pd.argmax_i, pd.argmax_j}},
                         {"n_vetted", pd.n_vetted},
                         {"n_occupied", pd.n_occupied},
                         {"weight_exponent", pd.weight_exponent}};
  } else {
    report["profile"] = nullptr;
  }

  const fs::path speeds_path = dir / "speeds_final.csv";
  if (fs::exists(speeds_path)) {
    auto speeds = read_speeds_csv(speeds_path.string());
    auto ti = usf::tail_index(speeds, k_fraction, n_boot);
    report["tail"] = {{"a_hat", ti.a_hat},
                      {"ci_lo", ti.ci_lo},
                      {"ci_hi", ti.ci_hi},
                      {"k", ti.k},
                      {"threshold", ti.threshold},
                      {"k_fraction", k_fraction}};
  } else {
    report["tail"] = nullptr;
  }

  if (!series.pmom_powers.empty()) {
    auto scan = usf::moment_boundedness_scan(series.t, series.pmom_powers,
                                             series.pmom);
    json table = json::array();
    for (const auto& row : scan.table)
      table.push_back({{"p", row.p},
                       {"slope", row.slope},
                       {"se", row.se},
                       {"unbounded", row.unbounded}});
    report["boundedness"] = {{"table", table}, {"p_star", scan.p_star}};
  } else {
    report["boundedness"] = nullptr;
  }

  if (out_path.empty()) out_path = (dir / "report.json").string();
  {
    std::ofstream out(out_path);
    if (!out) throw usf::ConfigError("cannot write '" + out_path + "'");
    out << report.dump(2) << "\n";
  }
  std::cout << report.dump(2) << "\n";
  return usf::exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinetic simulation suite for uniform shear flow"};
  app.require_subcommand(1);
  app.footer("Configuration keys (config file and --set):\n" +
             usf::config_help_text());

  auto* predict = app.add_subcommand(
      "predict", "closed-form self-similar growth rate and moments");
  double p_alpha = 0.0, p_b0 = kPi / 2.0;
  predict->add_option("--alpha", p_alpha, "shear rate")->required();
  predict->add_option("--b0", p_b0, "kernel constant b0 (default pi/2)");

  auto* moments = app.add_subcommand(
      "moments", "integrate the second-moment closure (CSV to stdout)");
  double mo_alpha = 0.1, mo_b0 = kPi / 2.0, mo_dt = 1e-3, mo_tend = 10.0,
         mo_cadence = 0.1, mo_beta = 0.0;
  std::string mo_m0, mo_out;
  bool mo_rescaled = false;
  moments->add_option("--alpha", mo_alpha, "shear rate");
  moments->add_option("--b0", mo_b0, "kernel constant b0 (default pi/2)");
  moments->add_option("--dt", mo_dt, "RK4 step");
  moments->add_option("--t-end", mo_tend, "final time");
  moments->add_option("--cadence", mo_cadence, "output cadence");
  moments->add_option("--m0", mo_m0, "initial M11,M12,M13,M22,M23,M33");
  moments->add_flag("--rescaled", mo_rescaled, "integrate the rescaled flow");
  moments->add_option("--beta", mo_beta, "fixed frame rate for --rescaled");
  moments->add_option("--out", mo_out, "write CSV here instead of stdout");

  RunCli rc;
  auto* homogeneous = app.add_subcommand(
      "homogeneous", "spatially homogeneous DSMC, physical frame");
  auto* self_similar = app.add_subcommand(
      "self-similar", "spatially homogeneous DSMC, rescaled frame");
  auto* inhomogeneous = app.add_subcommand(
      "inhomogeneous", "DSMC with 1-D periodic spatial cells");
  for (auto* sub : {homogeneous, self_similar, inhomogeneous}) {
    add_run_options(sub, rc);
    sub->footer("Configuration keys:\n" + usf::config_help_text());
  }

  auto* analyze =
      app.add_subcommand("analyze", "post-process a run directory");
  std::string an_run, an_out;
  int an_l = 1, an_boot = 400;
  double an_kfrac = 0.05, an_transient = 0.25, an_min_efolds = 5.0;
  bool an_no_span = false;
  analyze->add_option("--run", an_run, "run directory")->required();
  analyze->add_option("--out", an_out, "report path (default RUN/report.json)");
  analyze->add_option("--l", an_l, "profile weight exponent (1+|xi_12|^2)^l");
  analyze->add_option("--k-fraction", an_kfrac,
                      "tail fraction for the Hill estimator");
  analyze->add_option("--transient-frac", an_transient,
                      "fraction of the series dropped before fitting");
  analyze->add_option("--min-efolds", an_min_efolds,
                      "required e-folds of energy growth in the fit window");
  analyze->add_flag("--no-span-check", an_no_span,
                    "fit even when the window is too short to trust");
  analyze->add_option("--boot", an_boot, "bootstrap resamples");

  try {
    app.parse(argc, argv);

    if (*predict) return cmd_predict(p_alpha, p_b0);
    if (*moments)
      return cmd_moments(mo_alpha, mo_b0, mo_dt, mo_tend, mo_cadence, mo_m0,
                         mo_rescaled, mo_beta, mo_out);
    if (*analyze)
      return cmd_analyze(an_run, an_out, an_l, an_kfrac, an_transient,
                         an_min_efolds, an_no_span, an_boot);

    std::string mode = (*homogeneous) ? "homogeneous"
                       : (*self_similar) ? "self_similar"
                                         : "inhomogeneous";
    const CLI::App* sub = (*homogeneous)   ? homogeneous
                          : (*self_similar) ? self_similar
                                            : inhomogeneous;
    auto cfg = build_config(sub, rc, mode);
    auto result = (mode == "inhomogeneous") ? usf::run_inhomogeneous(cfg)
                                            : usf::run_homogeneous(cfg);
    print_run_summary(result);
    return usf::exit_ok;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    json err = {{"error",
                 {{"kind", "cli"}, {"message", e.what()},
                  {"exit_code", usf::exit_config}}}};
    std::cerr << err.dump() << "\n";
    return usf::exit_config;
  } catch (const usf::UsfError& e) {
    json detail = {{"kind", e.kind}, {"message", e.what()},
                   {"exit_code", e.code}};
    if (!e.detail_key.empty()) detail["key"] = e.detail_key;
    std::cerr << json{{"error", detail}}.dump() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    json err = {{"error",
                 {{"kind", "internal"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
}
