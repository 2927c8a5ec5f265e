#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "acid/runtime.hpp"

namespace acid {

/// Everything a config file can describe: one experiment template plus the
/// sweep around it (seeds for every subcommand, ratios for compare).
struct RunPlan {
  RuntimeConfig runtime;
  std::vector<std::uint64_t> seeds{0};
  std::vector<double> ratios{1.0, 2.0};  // compare only
  double threshold = 1e-3;               // compare: relative consensus reduction
  std::string output = ".";

  ExperimentConfig& experiment() { return runtime.experiment; }
  const ExperimentConfig& experiment() const { return runtime.experiment; }
};

/// Keys accepted in a config file, in echo order.
const std::vector<std::string_view>& config_keys();

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// unknown or repeated keys are rejected with the line number.
RunPlan parse_config(std::string_view text);
RunPlan load_config(const std::string& path);

/// Applies one key. Throws ErrorCode::invalid_config on unknown keys or
/// malformed values.
void set_config_value(RunPlan& plan, std::string_view key, std::string_view value);
std::string get_config_value(const RunPlan& plan, std::string_view key);

/// Canonical text of every key; parse_config(config_to_text(p)) == p.
std::string config_to_text(const RunPlan& plan);

}  // namespace acid
