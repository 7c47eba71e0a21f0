#include "usf/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "usf/errors.hpp"

namespace usf {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'",
                      key);
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'",
                      key);
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("key '" + key + "': expected an unsigned integer, got '" +
                          v + "'",
                      key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'",
                    key);
}

std::string fmt_double(double d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

struct Entry {
  ConfigKeyInfo info;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> e;
    auto add = [&e](std::string key, std::string module, std::string type,
                    std::string def, std::string desc, auto set, auto get) {
      e.push_back({{std::move(key), std::move(module), std::move(type),
                    std::move(def), std::move(desc)},
                   set, get});
    };

    add("run.mode", "cli", "string", "(set by subcommand)",
        "homogeneous | self_similar | inhomogeneous; must match the subcommand",
        [](RunConfig& c, const std::string& v) {
          if (!c.mode.empty() && v != c.mode)
            throw ConfigError("run.mode '" + v +
                                  "' conflicts with the subcommand ('" +
                                  c.mode + "')",
                              "run.mode");
          c.mode = v;
        },
        [](const RunConfig& c) { return c.mode; });
    add("run.N", "dsmc_core", "int", "100000", "number of particles",
        [](RunConfig& c, const std::string& v) { c.n = parse_int("run.N", v); },
        [](const RunConfig& c) { return std::to_string(c.n); });
    add("run.alpha", "dsmc_core", "float", "0.1", "shear rate",
        [](RunConfig& c, const std::string& v) {
          c.alpha = parse_double("run.alpha", v);
        },
        [](const RunConfig& c) { return fmt_double(c.alpha); });
    add("run.dt", "dsmc_core", "float", "0.001", "time step",
        [](RunConfig& c, const std::string& v) {
          c.dt = parse_double("run.dt", v);
        },
        [](const RunConfig& c) { return fmt_double(c.dt); });
    add("run.t_end", "dsmc_core", "float", "10", "simulated end time",
        [](RunConfig& c, const std::string& v) {
          c.t_end = parse_double("run.t_end", v);
        },
        [](const RunConfig& c) { return fmt_double(c.t_end); });
    add("run.seed", "dsmc_core", "uint", "12345", "random seed",
        [](RunConfig& c, const std::string& v) {
          c.seed = parse_uint("run.seed", v);
        },
        [](const RunConfig& c) { return std::to_string(c.seed); });
    add("run.splitting", "dsmc_core", "string", "strang",
        "operator splitting: strang | lie",
        [](RunConfig& c, const std::string& v) { c.splitting = v; },
        [](const RunConfig& c) { return c.splitting; });
    add("run.collisions", "dsmc_core", "string", "carry",
        "collision counting: carry (fractional counts carried) | poisson",
        [](RunConfig& c, const std::string& v) { c.collisions = v; },
        [](const RunConfig& c) { return c.collisions; });

    add("frame.kind", "dsmc_core", "string", "default",
        "physical | self_similar (default: physical for homogeneous, "
        "self_similar otherwise)",
        [](RunConfig& c, const std::string& v) { c.frame_kind = v; },
        [](const RunConfig& c) { return c.frame_kind; });
    add("frame.beta_policy", "dsmc_core", "string", "default",
        "dynamic (energy feedback) | fixed (default: fixed 0 for physical, "
        "dynamic for self_similar)",
        [](RunConfig& c, const std::string& v) { c.beta_policy = v; },
        [](const RunConfig& c) { return c.beta_policy; });
    add("frame.beta_value", "dsmc_core", "float", "0",
        "dilation rate used when frame.beta_policy = fixed",
        [](RunConfig& c, const std::string& v) {
          c.beta_value = parse_double("frame.beta_value", v);
        },
        [](const RunConfig& c) { return fmt_double(c.beta_value); });

    add("init.kind", "dsmc_core", "string", "maxwellian",
        "initial velocity distribution",
        [](RunConfig& c, const std::string& v) { c.init_kind = v; },
        [](const RunConfig& c) { return c.init_kind; });
    add("init.stretch", "dsmc_core", "floats", "1,1,1",
        "per-component scale applied after centering (anisotropic start)",
        [](RunConfig& c, const std::string& v) {
          std::istringstream ss(v);
          std::string tok;
          int k = 0;
          while (std::getline(ss, tok, ',')) {
            if (k >= 3) break;
            c.init_stretch[std::size_t(k++)] = parse_double("init.stretch", tok);
          }
          if (k != 3)
            throw ConfigError("init.stretch: expected three comma-separated "
                              "values",
                              "init.stretch");
        },
        [](const RunConfig& c) {
          return fmt_double(c.init_stretch[0]) + "," +
                 fmt_double(c.init_stretch[1]) + "," +
                 fmt_double(c.init_stretch[2]);
        });

    add("kernel.id", "kernel", "string", "cutoff_maxwell",
        "cutoff_maxwell (B0 = amplitude*|z|) | tabulated",
        [](RunConfig& c, const std::string& v) { c.kernel_id = v; },
        [](const RunConfig& c) { return c.kernel_id; });
    add("kernel.amplitude", "kernel", "float", "1", "kernel amplitude",
        [](RunConfig& c, const std::string& v) {
          c.kernel_amplitude = parse_double("kernel.amplitude", v);
        },
        [](const RunConfig& c) { return fmt_double(c.kernel_amplitude); });
    add("kernel.table_path", "kernel", "string", "",
        "(z, B0) table file for kernel.id = tabulated",
        [](RunConfig& c, const std::string& v) { c.kernel_table_path = v; },
        [](const RunConfig& c) { return c.kernel_table_path; });

    add("spatial.n_cells", "spatial", "int", "32", "number of cells",
        [](RunConfig& c, const std::string& v) {
          c.n_cells = int(parse_int("spatial.n_cells", v));
        },
        [](const RunConfig& c) { return std::to_string(c.n_cells); });
    add("spatial.L", "spatial", "float", "6.283185307179586",
        "periodic domain length",
        [](RunConfig& c, const std::string& v) {
          c.length = parse_double("spatial.L", v);
        },
        [](const RunConfig& c) { return fmt_double(c.length); });
    add("spatial.perturb.mode_k", "spatial", "int", "1",
        "wavenumber of the initial density perturbation",
        [](RunConfig& c, const std::string& v) {
          c.perturb_mode_k = int(parse_int("spatial.perturb.mode_k", v));
        },
        [](const RunConfig& c) { return std::to_string(c.perturb_mode_k); });
    add("spatial.perturb.amplitude", "spatial", "float", "0",
        "relative amplitude eps in 1 + eps*cos; 0 = uniform",
        [](RunConfig& c, const std::string& v) {
          c.perturb_amplitude = parse_double("spatial.perturb.amplitude", v);
        },
        [](const RunConfig& c) { return fmt_double(c.perturb_amplitude); });
    add("spatial.modes_max", "spatial", "int", "4",
        "highest density mode written to modes.csv",
        [](RunConfig& c, const std::string& v) {
          c.modes_max = int(parse_int("spatial.modes_max", v));
        },
        [](const RunConfig& c) { return std::to_string(c.modes_max); });

    add("output.dir", "cli", "string", "",
        "output directory (default: $USF_OUTPUT_ROOT or ./runs, plus "
        "<mode>-<seed>)",
        [](RunConfig& c, const std::string& v) { c.out_dir = v; },
        [](const RunConfig& c) { return c.out_dir; });
    add("output.cadence", "cli", "float", "0.1",
        "diagnostics interval in time units (snapped to whole steps)",
        [](RunConfig& c, const std::string& v) {
          c.cadence = parse_double("output.cadence", v);
        },
        [](const RunConfig& c) { return fmt_double(c.cadence); });
    add("output.cells", "cli", "bool", "false",
        "write per-cell moments (cells.csv, inhomogeneous runs)",
        [](RunConfig& c, const std::string& v) {
          c.out_cells = parse_bool("output.cells", v);
        },
        [](const RunConfig& c) { return c.out_cells ? "true" : "false"; });
    add("output.hist.enable", "analysis", "bool", "false",
        "accumulate (xi1, xi2) and speed histograms",
        [](RunConfig& c, const std::string& v) {
          c.hist_enable = parse_bool("output.hist.enable", v);
        },
        [](const RunConfig& c) { return c.hist_enable ? "true" : "false"; });
    add("output.hist.bins", "analysis", "int", "60", "histogram bins per axis",
        [](RunConfig& c, const std::string& v) {
          c.hist_bins = int(parse_int("output.hist.bins", v));
        },
        [](const RunConfig& c) { return std::to_string(c.hist_bins); });
    add("output.hist.range", "analysis", "float", "4.5",
        "histogram half-range: bins cover [-range, range]",
        [](RunConfig& c, const std::string& v) {
          c.hist_range = parse_double("output.hist.range", v);
        },
        [](const RunConfig& c) { return fmt_double(c.hist_range); });
    add("output.hist.t_start", "analysis", "float", "-1",
        "time to start accumulating histograms (< 0: t_end / 2)",
        [](RunConfig& c, const std::string& v) {
          c.hist_t_start = parse_double("output.hist.t_start", v);
        },
        [](const RunConfig& c) { return fmt_double(c.hist_t_start); });
    add("output.speeds", "analysis", "bool", "false",
        "write final per-particle speeds (speeds_final.csv)",
        [](RunConfig& c, const std::string& v) {
          c.out_speeds = parse_bool("output.speeds", v);
        },
        [](const RunConfig& c) { return c.out_speeds ? "true" : "false"; });
    add("output.pmoments", "analysis", "string", "",
        "comma-separated powers p: track <|xi|^p> columns in series.csv",
        [](RunConfig& c, const std::string& v) { c.pmoments = v; },
        [](const RunConfig& c) { return c.pmoments; });

    add("simd.backend", "cli", "string", "auto",
        "array kernel backend: auto | scalar | avx2",
        [](RunConfig& c, const std::string& v) { c.simd = v; },
        [](const RunConfig& c) { return c.simd; });
    add("threads", "cli", "int", "0",
        "transport worker threads; 0 = single-thread deterministic mode",
        [](RunConfig& c, const std::string& v) {
          c.threads = int(parse_int("threads", v));
        },
        [](const RunConfig& c) { return std::to_string(c.threads); });
    return e;
  }();
  return table;
}

const Entry& find_entry(const std::string& key) {
  for (const auto& e : entries())
    if (e.info.key == key) return e;
  throw ConfigError("unknown config key '" + key + "'", key);
}

void require(bool ok, const std::string& msg, const std::string& key) {
  if (!ok) throw ConfigError(msg, key);
}

template <class... Opts>
void require_one_of(const std::string& key, const std::string& v,
                    Opts... opts) {
  const bool ok = ((v == opts) || ...);
  if (!ok) {
    std::string all;
    ((all += all.empty() ? std::string(opts) : " | " + std::string(opts)), ...);
    throw ConfigError("key '" + key + "': '" + v + "' not one of " + all, key);
  }
}

}  // namespace

void config_apply(RunConfig& cfg, const std::string& key,
                  const std::string& value) {
  find_entry(key).set(cfg, value);
}

void config_load_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string s = trim(line);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config '" + path + "' line " + std::to_string(lineno) +
                            ": expected 'key = value'",
                        path);
    config_apply(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
}

void config_validate(RunConfig& cfg) {
  require_one_of("run.mode", cfg.mode, "homogeneous", "self_similar",
                 "inhomogeneous");
  require(cfg.n >= 2 && cfg.n <= (1LL << 31), "run.N must be in [2, 2^31]",
          "run.N");
  require(cfg.alpha >= 0.0 && std::isfinite(cfg.alpha),
          "run.alpha must be finite and >= 0", "run.alpha");
  require(cfg.dt > 0.0 && std::isfinite(cfg.dt), "run.dt must be > 0",
          "run.dt");
  require(cfg.t_end >= 0.0 && std::isfinite(cfg.t_end),
          "run.t_end must be >= 0", "run.t_end");
  require_one_of("run.splitting", cfg.splitting, "strang", "lie");
  require_one_of("run.collisions", cfg.collisions, "carry", "poisson");

  // resolve frame defaults per mode
  if (cfg.frame_kind == "default")
    cfg.frame_kind = cfg.mode == "homogeneous" ? "physical" : "self_similar";
  require_one_of("frame.kind", cfg.frame_kind, "physical", "self_similar");
  if (cfg.beta_policy == "default")
    cfg.beta_policy = cfg.frame_kind == "physical" ? "fixed" : "dynamic";
  require_one_of("frame.beta_policy", cfg.beta_policy, "dynamic", "fixed");
  if (cfg.frame_kind == "physical") {
    require(cfg.beta_policy == "fixed" && cfg.beta_value == 0.0,
            "the physical frame has no dilation: frame.beta_policy must stay "
            "fixed with frame.beta_value = 0 (use frame.kind = self_similar)",
            "frame.beta_policy");
  }
  require(std::isfinite(cfg.beta_value), "frame.beta_value must be finite",
          "frame.beta_value");

  require_one_of("init.kind", cfg.init_kind, "maxwellian");
  for (double s : cfg.init_stretch)
    require(s > 0.0 && std::isfinite(s), "init.stretch entries must be > 0",
            "init.stretch");

  require_one_of("kernel.id", cfg.kernel_id, "cutoff_maxwell", "tabulated");
  require(cfg.kernel_amplitude > 0.0 && std::isfinite(cfg.kernel_amplitude),
          "kernel.amplitude must be > 0", "kernel.amplitude");
  if (cfg.kernel_id == "tabulated")
    require(!cfg.kernel_table_path.empty(),
            "kernel.id = tabulated requires kernel.table_path",
            "kernel.table_path");

  require(cfg.n_cells >= 1 && cfg.n_cells <= 1 << 20,
          "spatial.n_cells must be in [1, 2^20]", "spatial.n_cells");
  require(cfg.length > 0.0 && std::isfinite(cfg.length),
          "spatial.L must be > 0", "spatial.L");
  require(cfg.perturb_mode_k >= 1, "spatial.perturb.mode_k must be >= 1",
          "spatial.perturb.mode_k");
  require(cfg.perturb_amplitude >= 0.0 && cfg.perturb_amplitude < 1.0,
          "spatial.perturb.amplitude must lie in [0, 1)",
          "spatial.perturb.amplitude");
  require(cfg.modes_max >= 0 && cfg.modes_max <= 64,
          "spatial.modes_max must be in [0, 64]", "spatial.modes_max");

  require(cfg.cadence > 0.0 && std::isfinite(cfg.cadence),
          "output.cadence must be > 0", "output.cadence");
  require(cfg.hist_bins >= 2 && cfg.hist_bins <= 4096,
          "output.hist.bins must be in [2, 4096]", "output.hist.bins");
  require(cfg.hist_range > 0.0 && std::isfinite(cfg.hist_range),
          "output.hist.range must be > 0", "output.hist.range");
  parse_pmoments(cfg.pmoments);

  require_one_of("simd.backend", cfg.simd, "auto", "scalar", "avx2");
  require(cfg.threads >= 0 && cfg.threads <= 1024,
          "threads must be in [0, 1024]", "threads");
}

std::string config_render_resolved(const RunConfig& cfg) {
  std::string out;
  for (const auto& e : entries()) {
    out += e.info.key;
    out += " = ";
    out += e.get(cfg);
    out += '\n';
  }
  return out;
}

const std::vector<ConfigKeyInfo>& config_schema() {
  static const std::vector<ConfigKeyInfo> infos = [] {
    std::vector<ConfigKeyInfo> v;
    for (const auto& e : entries()) v.push_back(e.info);
    return v;
  }();
  return infos;
}

std::string config_help_text() {
  std::string out = "Config keys (config file 'key = value' lines or --set "
                    "key=value; flags win):\n";
  for (const auto& e : entries()) {
    out += "  " + e.info.key + " (" + e.info.type + ", default " +
           (e.info.default_value.empty() ? "\"\"" : e.info.default_value) +
           ", module " + e.info.module + ")\n      " + e.info.description +
           "\n";
  }
  return out;
}

std::vector<int> parse_pmoments(const std::string& csv) {
  std::vector<int> out;
  if (trim(csv).empty()) return out;
  std::istringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const long long p = parse_int("output.pmoments", trim(tok));
    if (p < 1 || p > 64)
      throw ConfigError("output.pmoments entries must be in [1, 64]",
                        "output.pmoments");
    out.push_back(int(p));
  }
  if (out.size() > 16)
    throw ConfigError("output.pmoments supports at most 16 powers",
                      "output.pmoments");
  return out;
}

}  // namespace usf
