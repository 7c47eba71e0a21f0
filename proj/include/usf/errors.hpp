#pragma once

#include <stdexcept>
#include <string>

namespace usf {

// Exit codes shared by the CLI and the error types thrown from the library.
enum exit_code : int {
  exit_ok = 0,
  exit_config = 2,    // bad/unknown config, malformed inputs
  exit_guard = 3,     // numerical stability guard tripped
  exit_analysis = 4,  // analysis could not produce a trustworthy result
};

struct UsfError : std::runtime_error {
  int code;
  std::string kind;
  std::string detail_key;   // offending config key / file path, if any
  UsfError(int c, std::string k, const std::string& msg, std::string dk = {})
      : std::runtime_error(msg), code(c), kind(std::move(k)), detail_key(std::move(dk)) {}
};

struct ConfigError : UsfError {
  explicit ConfigError(const std::string& msg, std::string key = {})
      : UsfError(exit_config, "config", msg, std::move(key)) {}
};

struct GuardError : UsfError {
  explicit GuardError(const std::string& msg, std::string key = {})
      : UsfError(exit_guard, "guard", msg, std::move(key)) {}
};

struct AnalysisError : UsfError {
  explicit AnalysisError(const std::string& msg, std::string key = {})
      : UsfError(exit_analysis, "analysis", msg, std::move(key)) {}
};

}  // namespace usf
