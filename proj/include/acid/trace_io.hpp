#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acid/config.hpp"
#include "acid/experiment.hpp"

namespace acid {

inline constexpr const char* kTraceCsvHeader =
    "t,consensus_sq,loss_mean,dist_opt_sq,grad_norm_sq_mean,grad_events,comm_events";

std::string trace_to_csv(const Trace& trace);

/// JSON document with the config echo (`plan` as run, seed included), the
/// resolved parameters, a summary of the last sample and a digest of the
/// final states.
std::string trace_to_json(const Trace& trace, const RunPlan& plan);

/// FNV-1a over the raw bytes of every final x and x_tilde.
std::uint64_t state_digest(std::span<const WorkerState> states);

/// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const std::string& path, const std::string& content);

struct CompareRow {
  bool accelerated = true;
  double ratio = 1.0;
  double gamma = 0.0;
  double final_consensus_sq = 0.0;  // seed mean
  double final_loss = 0.0;          // seed mean
  std::optional<double> time_to_threshold;  // on the seed-averaged trajectory
};

/// {accelerated, non-accelerated} x plan.ratios, each averaged over
/// plan.seeds with the simulator. With gamma = auto every row uses the
/// smallest bound of the matrix so rows differ only in the gossip.
std::vector<CompareRow> run_compare(const RunPlan& plan);
std::string compare_to_csv(const std::vector<CompareRow>& rows);
std::string compare_to_json(const std::vector<CompareRow>& rows, const RunPlan& plan);

}  // namespace acid
