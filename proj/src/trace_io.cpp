#include "acid/trace_io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include <json.hpp>

#include "acid/error.hpp"
#include "acid/simulator.hpp"

namespace acid {

namespace {

using nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no NaN; absent metrics become null.
ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json config_json(const RunPlan& plan) {
  ordered_json out = ordered_json::object();
  for (auto key : config_keys()) out[std::string(key)] = get_config_value(plan, key);
  return out;
}

}  // namespace

std::string trace_to_csv(const Trace& trace) {
  std::string out = kTraceCsvHeader;
  out += '\n';
  for (const auto& s : trace.samples) {
    out += fmt(s.t) + ',' + fmt(s.consensus_sq) + ',' + fmt(s.loss_mean) + ',' +
           fmt(s.dist_opt_sq) + ',' + fmt(s.grad_norm_sq_mean) + ',' +
           std::to_string(s.grad_events) + ',' + std::to_string(s.comm_events) + '\n';
  }
  return out;
}

std::uint64_t state_digest(std::span<const WorkerState> states) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](const Eigen::VectorXd& v) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
    for (std::size_t k = 0; k < static_cast<std::size_t>(v.size()) * sizeof(double); ++k) {
      h ^= bytes[k];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& s : states) {
    feed(s.x);
    feed(s.x_tilde);
  }
  return h;
}

std::string trace_to_json(const Trace& trace, const RunPlan& plan) {
  ordered_json doc;
  doc["mode"] = trace.mode;
  doc["config"] = config_json(plan);

  ordered_json resolved;
  resolved["gamma"] = trace.gamma;
  resolved["gamma_bound"] = trace.gamma_bound;
  resolved["eta"] = trace.params.eta;
  resolved["alpha"] = trace.params.alpha;
  resolved["alpha_tilde"] = trace.params.alpha_tilde;
  resolved["chi"] = trace.params.chi;
  if (trace.spectral) {
    resolved["chi1"] = trace.spectral->chi1;
    resolved["chi2"] = trace.spectral->chi2;
    resolved["trace_lambda"] = trace.spectral->trace_lambda;
    resolved["lambda_norm"] = trace.spectral->lambda_norm;
  }
  doc["resolved"] = resolved;

  ordered_json summary;
  summary["samples"] = trace.samples.size();
  summary["events"] = trace.events;
  summary["rejected_comm_events"] = trace.rejected_comm_events;
  if (!trace.samples.empty()) {
    const auto& last = trace.samples.back();
    summary["t"] = last.t;
    summary["consensus_sq"] = num(last.consensus_sq);
    summary["consensus_sq_per_worker"] =
        num(last.consensus_sq / static_cast<double>(std::max<std::size_t>(trace.final_states.size(), 1)));
    summary["loss_mean"] = num(last.loss_mean);
    summary["dist_opt_sq"] = num(last.dist_opt_sq);
    summary["grad_norm_sq_mean"] = num(last.grad_norm_sq_mean);
    summary["time_avg_grad_norm"] = num(time_avg_grad_norm(trace.samples));
    summary["grad_events"] = last.grad_events;
    summary["comm_events"] = last.comm_events;
  }
  doc["summary"] = summary;

  char digest[20];
  std::snprintf(digest, sizeof digest, "%016llx",
                static_cast<unsigned long long>(state_digest(trace.final_states)));
  doc["final_states_digest"] = digest;

  if (trace.timing) {
    const auto& tm = *trace.timing;
    ordered_json timing;
    timing["wall_seconds"] = tm.wall_seconds;
    timing["unit_time_seconds"] = tm.unit_time_seconds;
    timing["measured_ratio"] = tm.measured_ratio;
    timing["tracker_gap"] = tm.tracker_gap;
    timing["ledger_rel_error"] = tm.ledger_rel_error;
    ordered_json workers = ordered_json::array();
    for (const auto& w : tm.workers) {
      workers.push_back({{"grad_events", w.grad_events},
                         {"comm_events", w.comm_events},
                         {"mean_grad_duration_s", w.mean_grad_duration_s},
                         {"mean_comm_duration_s", w.mean_comm_duration_s}});
    }
    timing["workers"] = workers;
    doc["timing"] = timing;
  }
  return doc.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
  const fs::path tmp = target.string() + ".tmp" + std::to_string(tid);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::io, "short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::io, "cannot rename onto '" + path + "'");
  }
}

std::vector<CompareRow> run_compare(const RunPlan& plan) {
  require(!plan.ratios.empty(), "compare needs at least one ratio", ErrorCode::invalid_config);
  require(plan.threshold > 0.0 && plan.threshold < 1.0, "threshold must lie in (0, 1)",
          ErrorCode::invalid_config);

  std::vector<ExperimentConfig> matrix;
  for (bool acc : {true, false}) {
    for (double r : plan.ratios) {
      ExperimentConfig cfg = plan.experiment();
      cfg.accelerated = acc;
      cfg.graph.ratio = r;
      matrix.push_back(cfg);
    }
  }
  if (!plan.experiment().gamma) {
    double gamma = std::numeric_limits<double>::infinity();
    for (const auto& cfg : matrix) gamma = std::min(gamma, resolve(cfg).gamma_bound);
    for (auto& cfg : matrix) cfg.gamma = gamma;
  }

  std::vector<CompareRow> rows;
  for (const auto& base : matrix) {
    std::vector<double> mean_consensus;
    std::vector<double> times;
    double loss = 0.0;
    double gamma = 0.0;
    for (auto seed : plan.seeds) {
      ExperimentConfig cfg = base;
      cfg.seed = seed;
      const Trace trace = run_simulation(cfg);
      gamma = trace.gamma;
      if (mean_consensus.empty()) {
        mean_consensus.assign(trace.samples.size(), 0.0);
        for (const auto& s : trace.samples) times.push_back(s.t);
      }
      for (std::size_t k = 0; k < trace.samples.size(); ++k) {
        mean_consensus[k] += trace.samples[k].consensus_sq;
      }
      loss += trace.samples.back().loss_mean;
    }
    const double count = static_cast<double>(plan.seeds.size());
    for (auto& c : mean_consensus) c /= count;

    CompareRow row;
    row.accelerated = base.accelerated;
    row.ratio = base.graph.ratio;
    row.gamma = gamma;
    row.final_consensus_sq = mean_consensus.back();
    row.final_loss = loss / count;
    if (mean_consensus.front() > 0.0) {
      const double level = plan.threshold * mean_consensus.front();
      for (std::size_t k = 0; k < mean_consensus.size(); ++k) {
        if (mean_consensus[k] <= level) {
          row.time_to_threshold = times[k];
          break;
        }
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::string compare_to_csv(const std::vector<CompareRow>& rows) {
  std::string out = "accelerated,ratio,gamma,final_consensus_sq,final_loss,time_to_threshold\n";
  for (const auto& r : rows) {
    out += std::string(r.accelerated ? "true" : "false") + ',' + fmt(r.ratio) + ',' + fmt(r.gamma) +
           ',' + fmt(r.final_consensus_sq) + ',' + fmt(r.final_loss) + ',' +
           (r.time_to_threshold ? fmt(*r.time_to_threshold) : std::string("inf")) + '\n';
  }
  return out;
}

std::string compare_to_json(const std::vector<CompareRow>& rows, const RunPlan& plan) {
  ordered_json doc;
  doc["mode"] = "compare";
  doc["config"] = config_json(plan);
  ordered_json list = ordered_json::array();
  for (const auto& r : rows) {
    list.push_back({{"accelerated", r.accelerated},
                    {"ratio", r.ratio},
                    {"gamma", r.gamma},
                    {"final_consensus_sq", num(r.final_consensus_sq)},
                    {"final_loss", num(r.final_loss)},
                    {"time_to_threshold",
                     r.time_to_threshold ? ordered_json(*r.time_to_threshold) : ordered_json(nullptr)}});
  }
  doc["rows"] = list;
  return doc.dump(2) + "\n";
}

}  // namespace acid
