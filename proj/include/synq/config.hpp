#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "synq/environment.hpp"
#include "synq/evaluation.hpp"
#include "synq/td3.hpp"
#include "synq/training.hpp"

namespace synq {

struct OutputPaths {
  std::string checkpoint = "checkpoint.synq";
  std::string log = "train_log.csv";
  std::string trace = "trace.csv";
  std::string report = "report.txt";
  std::string plot = "trace.svg";

  bool operator==(const OutputPaths&) const = default;
};

/// Everything one run needs, resolved from a flat `key = value` file.
struct RunConfig {
  EnvConfig env;
  Td3Hyperparams td3;
  EvalProtocol eval;
  TrainSchedule train;
  OutputPaths output;
  std::uint64_t seed = 0;

  /// Defaults for a regime, including regime-dependent coupling and
  /// heterogeneity and the a_max-relative smoothing noise.
  static RunConfig defaults(RegimeKind regime = RegimeKind::Regular);

  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parses config text. Blank lines and `#` comments are ignored; unknown or
/// duplicate keys and malformed values raise ConfigError with the line.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Every resolved key, one `key = value` per line, in a fixed order. Parsing
/// the result reproduces the config exactly.
std::string config_to_text(const RunConfig& config);

/// Names of all accepted keys.
const std::vector<std::string>& config_keys();

}  // namespace synq
