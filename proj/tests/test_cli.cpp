#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const std::string& args) {
  static int serial = 0;
  const auto tmp = fs::temp_directory_path();
  const auto out = tmp / ("usf_cli_out_" + std::to_string(serial) + ".txt");
  const auto err = tmp / ("usf_cli_err_" + std::to_string(serial) + ".txt");
  ++serial;
  const std::string cmd = std::string(USF_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  fs::remove(out);
  fs::remove(err);
  return r;
}

json stderr_error(const CliResult& r) {
  auto j = json::parse(r.err);
  return j.at("error");
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("predict emits the closed-form solution as json") {
  auto r = run_cli("predict --alpha 0.1");
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["s"].get<double>() == doctest::Approx(2.1192058628576514e-3).epsilon(1e-12));
  CHECK(j["beta"].get<double>() == doctest::Approx(1.0596029314288257e-3).epsilon(1e-12));
  CHECK(j["M_steady"]["M12"].get<double>() ==
        doctest::Approx(-0.0317880879429).epsilon(1e-9));
  CHECK(j["b0"].get<double>() == doctest::Approx(1.5707963267948966).epsilon(1e-15));
}

TEST_CASE("bad invocations exit 2 with a json error") {
  auto none = run_cli("");
  CHECK(none.code == 2);
  CHECK(stderr_error(none)["kind"] == "cli");

  auto badflag = run_cli("predict --alpha 0.1 --nonsense 3");
  CHECK(badflag.code == 2);

  auto badb0 = run_cli("predict --alpha 0.1 --b0 0");
  CHECK(badb0.code == 2);
  CHECK(stderr_error(badb0)["kind"] == "config");

  auto badkey = run_cli("self-similar --t-end 0.01 --n 100 --set bogus.key=1");
  CHECK(badkey.code == 2);
  auto e = stderr_error(badkey);
  CHECK(e["kind"] == "config");
  CHECK(std::string(e["message"]).find("bogus.key") != std::string::npos);

  auto badval = run_cli("self-similar --t-end 0.01 --n 100 --set run.N=many");
  CHECK(badval.code == 2);
}

TEST_CASE("stability guards exit 3 and name the offending key") {
  // dt * nu0 = 0.2 * 2 pi > 0.5
  auto r = run_cli("self-similar --n 1000 --t-end 1 --dt 0.2");
  CHECK(r.code == 3);
  auto e = stderr_error(r);
  CHECK(e["kind"] == "guard");
  CHECK(e["key"] == "run.dt");
}

TEST_CASE("analyze exits 4 when the fit window cannot span enough growth") {
  const auto dir = fresh_dir("usf_cli_span");
  fs::create_directories(dir);
  {
    std::ofstream sum(dir / "summary.json");
    sum << R"({"alpha": 0.1, "b0": 1.5707963267948966, "mode": "homogeneous"})";
  }
  {
    // strongly significant growth, but only ~0.02 e-folds in the window
    std::ofstream s(dir / "series.csv");
    s << "t,M11,M12,M13,M22,M23,M33,trace,heat_flux,beta\n";
    for (int i = 0; i <= 100; ++i) {
      const double t = 0.1 * i;
      const double tr = 3.0 * std::exp(2.0 * 1.06e-3 * t);
      s << t << "," << tr / 3 << ",0,0," << tr / 3 << ",0," << tr / 3 << ","
        << tr << ",0,0\n";
    }
  }
  auto r = run_cli("analyze --run " + dir.string());
  CHECK(r.code == 4);
  auto e = stderr_error(r);
  CHECK(e["kind"] == "analysis");
  CHECK(std::string(e["message"]).find("e-folds") != std::string::npos);

  // the escape hatch turns the same input into a report
  auto ok = run_cli("analyze --run " + dir.string() + " --no-span-check");
  CHECK(ok.code == 0);
  auto report = json::parse(ok.out);
  CHECK(report["beta_fit"]["beta_hat"].get<double>() ==
        doctest::Approx(1.06e-3).epsilon(1e-6));
  fs::remove_all(dir);
}

TEST_CASE("analyze exits 4 on an under-resolved histogram") {
  const auto dir = fresh_dir("usf_cli_sparse");
  auto run = run_cli("homogeneous --n 400 --t-end 0.5 --dt 1e-3 --seed 5 --out " +
                     dir.string() +
                     " --set output.hist.enable=true --set output.hist.bins=60");
  REQUIRE(run.code == 0);
  auto r = run_cli("analyze --run " + dir.string());
  CHECK(r.code == 4);
  CHECK(stderr_error(r)["kind"] == "analysis");
  fs::remove_all(dir);
}

TEST_CASE("help enumerates every config key with its module") {
  auto r = run_cli("homogeneous --help");
  REQUIRE(r.code == 0);
  for (const char* key :
       {"run.N", "run.alpha", "run.dt", "run.t_end", "run.seed",
        "run.splitting", "run.collisions", "frame.kind", "frame.beta_policy",
        "init.stretch", "kernel.id", "kernel.amplitude", "spatial.n_cells",
        "spatial.L", "spatial.perturb.mode_k", "spatial.perturb.amplitude",
        "spatial.modes_max", "output.dir", "output.cadence",
        "output.hist.enable", "output.hist.bins", "output.hist.range",
        "output.pmoments", "simd.backend", "threads"})
    CHECK(r.out.find(key) != std::string::npos);
  // owning modules are listed alongside
  for (const char* mod : {"module kernel", "module dsmc_core",
                          "module spatial", "module analysis", "module cli"})
    CHECK(r.out.find(mod) != std::string::npos);
}

TEST_CASE("same seed gives byte-identical outputs, different seed does not") {
  const auto d1 = fresh_dir("usf_cli_det1");
  const auto d2 = fresh_dir("usf_cli_det2");
  const auto d3 = fresh_dir("usf_cli_det3");
  const std::string base = "self-similar --n 4000 --alpha 0.2 --t-end 0.5 ";
  REQUIRE(run_cli(base + "--seed 42 --out " + d1.string()).code == 0);
  REQUIRE(run_cli(base + "--seed 42 --out " + d2.string()).code == 0);
  REQUIRE(run_cli(base + "--seed 43 --out " + d3.string()).code == 0);
  const auto s1 = slurp(d1 / "series.csv");
  CHECK(s1 == slurp(d2 / "series.csv"));
  CHECK(s1 != slurp(d3 / "series.csv"));
  CHECK(!s1.empty());
  fs::remove_all(d1);
  fs::remove_all(d2);
  fs::remove_all(d3);
}

TEST_CASE("config file loads, flags override, resolved config is written") {
  const auto dir = fresh_dir("usf_cli_cfg");
  const auto cfg_path = fs::temp_directory_path() / "usf_cli_test.cfg";
  {
    std::ofstream cfg(cfg_path);
    cfg << "# test configuration\n";
    cfg << "run.alpha = 0.3\n";
    cfg << "run.N = 2000\n";
    cfg << "output.cadence = 0.25\n";
  }
  auto r = run_cli("self-similar --config " + cfg_path.string() +
                   " --alpha 0.2 --t-end 0.5 --out " + dir.string());
  REQUIRE(r.code == 0);

  const auto resolved = slurp(dir / "config_resolved.cfg");
  CHECK(resolved.find("run.alpha = 0.2") != std::string::npos);  // flag wins
  CHECK(resolved.find("run.N = 2000") != std::string::npos);     // file value
  CHECK(resolved.find("output.cadence = 0.25") != std::string::npos);

  auto summary = json::parse(slurp(dir / "summary.json"));
  CHECK(summary["alpha"].get<double>() == 0.2);
  CHECK(summary["n_particles"].get<int>() == 2000);
  CHECK(summary["b0"].get<double>() == doctest::Approx(1.5707963267949).epsilon(1e-12));
  CHECK(summary["nu0"].get<double>() == doctest::Approx(6.2831853071796).epsilon(1e-12));

  // unknown keys in the file are rejected
  {
    std::ofstream cfg(cfg_path);
    cfg << "run.alpa = 0.3\n";
  }
  auto bad = run_cli("self-similar --config " + cfg_path.string());
  CHECK(bad.code == 2);
  CHECK(std::string(stderr_error(bad)["message"]).find("run.alpa") !=
        std::string::npos);
  fs::remove(cfg_path);
  fs::remove_all(dir);
}

TEST_CASE("moments subcommand prints the closure trajectory") {
  auto r = run_cli("moments --alpha 0.1 --t-end 1 --cadence 0.25");
  REQUIRE(r.code == 0);
  std::istringstream ss(r.out);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "t,M11,M12,M13,M22,M23,M33,trace");
  int rows = 0;
  while (std::getline(ss, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("subcommand frame defaults: homogeneous physical, rescaled dynamic") {
  const auto d1 = fresh_dir("usf_cli_frame1");
  auto r1 = run_cli("homogeneous --n 2000 --t-end 0.2 --out " + d1.string());
  REQUIRE(r1.code == 0);
  auto s1 = json::parse(slurp(d1 / "summary.json"));
  CHECK(s1["frame"]["kind"] == "physical");
  CHECK(s1["final"]["beta"].get<double>() == 0.0);

  const auto d2 = fresh_dir("usf_cli_frame2");
  auto r2 = run_cli("self-similar --n 2000 --t-end 0.2 --out " + d2.string());
  REQUIRE(r2.code == 0);
  auto s2 = json::parse(slurp(d2 / "summary.json"));
  CHECK(s2["frame"]["kind"] == "self_similar");
  CHECK(s2["frame"]["beta_policy"] == "dynamic");
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("fixed-beta frame and splitting options are honored") {
  const auto dir = fresh_dir("usf_cli_fixed");
  auto r = run_cli(
      "self-similar --n 2000 --alpha 0.1 --t-end 0.2 --out " + dir.string() +
      " --set frame.beta_policy=fixed --set frame.beta_value=1.06e-3 "
      "--set run.splitting=lie");
  REQUIRE(r.code == 0);
  auto s = json::parse(slurp(dir / "summary.json"));
  CHECK(s["frame"]["beta_policy"] == "fixed");
  CHECK(s["final"]["beta"].get<double>() == doctest::Approx(1.06e-3));
  CHECK(s["splitting"] == "lie");
  fs::remove_all(dir);
}
