#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace usf {

// Full run configuration. Defaults here are the documented defaults; the
// subcommand sets `mode`, then file values and flag overrides are applied in
// that order (later wins) and validate() is called once at the end.
struct RunConfig {
  // run.*
  std::string mode;  // homogeneous | self_similar | inhomogeneous
  long long n = 100000;
  double alpha = 0.1;
  double dt = 1e-3;
  double t_end = 10.0;
  std::uint64_t seed = 12345;
  std::string splitting = "strang";   // strang | lie
  std::string collisions = "carry";   // carry | poisson

  // frame.*
  std::string frame_kind = "default";   // physical | self_similar | default
  std::string beta_policy = "default";  // dynamic | fixed | default
  double beta_value = 0.0;

  // init.*
  std::string init_kind = "maxwellian";
  std::array<double, 3> init_stretch{1.0, 1.0, 1.0};

  // kernel.*
  std::string kernel_id = "cutoff_maxwell";  // cutoff_maxwell | tabulated
  double kernel_amplitude = 1.0;
  std::string kernel_table_path;

  // spatial.*
  int n_cells = 32;
  double length = 6.283185307179586;
  int perturb_mode_k = 1;
  double perturb_amplitude = 0.0;
  int modes_max = 4;

  // output.*
  std::string out_dir;
  double cadence = 0.1;
  bool out_cells = false;
  bool hist_enable = false;
  int hist_bins = 60;
  double hist_range = 4.5;
  double hist_t_start = -1.0;  // < 0: start at t_end/2
  bool out_speeds = false;
  std::string pmoments;  // comma-separated powers, e.g. "4,6,8"

  std::string simd = "auto";  // auto | scalar | avx2
  int threads = 0;            // 0 = single-thread deterministic mode
};

struct ConfigKeyInfo {
  std::string key;
  std::string module;
  std::string type;
  std::string default_value;
  std::string description;
};

// Schema-driven access: unknown keys and malformed values throw ConfigError.
void config_apply(RunConfig& cfg, const std::string& key,
                  const std::string& value);
void config_load_file(RunConfig& cfg, const std::string& path);
void config_validate(RunConfig& cfg);  // also resolves "default" frame fields
std::string config_render_resolved(const RunConfig& cfg);
const std::vector<ConfigKeyInfo>& config_schema();
std::string config_help_text();

std::vector<int> parse_pmoments(const std::string& csv);

}  // namespace usf
