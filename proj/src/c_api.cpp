#include "acid/acid.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "acid/config.hpp"
#include "acid/error.hpp"
#include "acid/simulator.hpp"
#include "acid/trace_io.hpp"

struct acid_config {
  acid::RunPlan plan;
};

struct acid_graph {
  acid::Graph graph;
};

struct acid_trace {
  acid::Trace trace;
  acid::RunPlan plan;  // as run, seed pinned
};

namespace {

thread_local std::string last_error;

acid_status to_status(acid::ErrorCode code) {
  switch (code) {
    case acid::ErrorCode::invalid_argument: return ACID_ERR_INVALID_ARGUMENT;
    case acid::ErrorCode::invalid_config: return ACID_ERR_INVALID_CONFIG;
    case acid::ErrorCode::disconnected: return ACID_ERR_DISCONNECTED;
    case acid::ErrorCode::diverged: return ACID_ERR_DIVERGED;
    case acid::ErrorCode::unsupported: return ACID_ERR_UNSUPPORTED;
    case acid::ErrorCode::io: return ACID_ERR_IO;
    case acid::ErrorCode::deadlock: return ACID_ERR_DEADLOCK;
    case acid::ErrorCode::clock_regression: return ACID_ERR_CLOCK_REGRESSION;
    case acid::ErrorCode::internal: return ACID_ERR_INTERNAL;
  }
  return ACID_ERR_INTERNAL;
}

template <class F>
acid_status guard(F&& body) {
  try {
    body();
    return ACID_OK;
  } catch (const acid::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return ACID_ERR_INTERNAL;
}

void check_ptr(const void* p, const char* name) {
  if (!p) acid::fail(acid::ErrorCode::invalid_argument, std::string(name) + " is NULL");
}

char* dup(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* acid_last_error(void) { return last_error.c_str(); }

const char* acid_status_name(acid_status status) {
  switch (status) {
    case ACID_OK: return "ok";
    case ACID_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case ACID_ERR_INVALID_CONFIG: return "invalid_config";
    case ACID_ERR_DISCONNECTED: return "disconnected";
    case ACID_ERR_DIVERGED: return "diverged";
    case ACID_ERR_UNSUPPORTED: return "unsupported";
    case ACID_ERR_IO: return "io";
    case ACID_ERR_DEADLOCK: return "deadlock";
    case ACID_ERR_CLOCK_REGRESSION: return "clock_regression";
    case ACID_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void acid_string_free(char* s) { std::free(s); }

acid_status acid_config_new(acid_config** out) {
  return guard([&] {
    check_ptr(out, "out");
    *out = new acid_config{};
  });
}

acid_status acid_config_parse_string(const char* text, acid_config** out) {
  return guard([&] {
    check_ptr(text, "text");
    check_ptr(out, "out");
    *out = new acid_config{acid::parse_config(text)};
  });
}

acid_status acid_config_parse_file(const char* path, acid_config** out) {
  return guard([&] {
    check_ptr(path, "path");
    check_ptr(out, "out");
    *out = new acid_config{acid::load_config(path)};
  });
}

acid_status acid_config_set(acid_config* cfg, const char* key, const char* value) {
  return guard([&] {
    check_ptr(cfg, "cfg");
    check_ptr(key, "key");
    check_ptr(value, "value");
    acid::set_config_value(cfg->plan, key, value);
  });
}

acid_status acid_config_get(const acid_config* cfg, const char* key, char** out) {
  return guard([&] {
    check_ptr(cfg, "cfg");
    check_ptr(key, "key");
    check_ptr(out, "out");
    *out = dup(acid::get_config_value(cfg->plan, key));
  });
}

acid_status acid_config_to_text(const acid_config* cfg, char** out) {
  return guard([&] {
    check_ptr(cfg, "cfg");
    check_ptr(out, "out");
    *out = dup(acid::config_to_text(cfg->plan));
  });
}

acid_status acid_config_seed_count(const acid_config* cfg, size_t* out) {
  return guard([&] {
    check_ptr(cfg, "cfg");
    check_ptr(out, "out");
    *out = cfg->plan.seeds.size();
  });
}

acid_status acid_config_seed_at(const acid_config* cfg, size_t index, uint64_t* out) {
  return guard([&] {
    check_ptr(cfg, "cfg");
    check_ptr(out, "out");
    acid::require(index < cfg->plan.seeds.size(), "seed index out of range");
    *out = cfg->plan.seeds[index];
  });
}

void acid_config_free(acid_config* cfg) { delete cfg; }

acid_status acid_graph_build(const char* kind, size_t n, double ratio, acid_graph** out) {
  return guard([&] {
    check_ptr(kind, "kind");
    check_ptr(out, "out");
    *out = new acid_graph{acid::build_topology(acid::parse_topology_kind(kind), n, ratio)};
  });
}

acid_status acid_graph_from_config(const acid_config* cfg, acid_graph** out) {
  return guard([&] {
    check_ptr(cfg, "cfg");
    check_ptr(out, "out");
    *out = new acid_graph{cfg->plan.experiment().graph.build()};
  });
}

acid_status acid_graph_node_count(const acid_graph* g, size_t* out) {
  return guard([&] {
    check_ptr(g, "graph");
    check_ptr(out, "out");
    *out = g->graph.node_count();
  });
}

acid_status acid_graph_spectral(const acid_graph* g, acid_spectral* out) {
  return guard([&] {
    check_ptr(g, "graph");
    check_ptr(out, "out");
    const auto r = acid::spectral_report(g->graph);
    *out = {r.chi1, r.chi2, r.trace_lambda, r.lambda_norm};
  });
}

acid_status acid_graph_effective_resistance(const acid_graph* g, size_t i, size_t j, double* out) {
  return guard([&] {
    check_ptr(g, "graph");
    check_ptr(out, "out");
    *out = acid::effective_resistance(g->graph, i, j);
  });
}

void acid_graph_free(acid_graph* g) { delete g; }

acid_status acid_run(const acid_config* cfg, acid_run_kind kind, uint64_t seed, acid_trace** out) {
  return guard([&] {
    check_ptr(cfg, "cfg");
    check_ptr(out, "out");
    acid::RunPlan plan = cfg->plan;
    plan.seeds = {seed};
    plan.experiment().seed = seed;
    acid::Trace trace;
    switch (kind) {
      case ACID_RUN_SIMULATE: trace = acid::run_simulation(plan.experiment()); break;
      case ACID_RUN_RUNTIME: trace = acid::run_concurrent(plan.runtime); break;
      case ACID_RUN_BASELINE: trace = acid::run_sync_baseline(plan.experiment()); break;
      default: acid::fail(acid::ErrorCode::invalid_argument, "unknown run kind");
    }
    *out = new acid_trace{std::move(trace), std::move(plan)};
  });
}

acid_status acid_trace_sample_count(const acid_trace* tr, size_t* out) {
  return guard([&] {
    check_ptr(tr, "trace");
    check_ptr(out, "out");
    *out = tr->trace.samples.size();
  });
}

acid_status acid_trace_sample(const acid_trace* tr, size_t index, acid_sample* out) {
  return guard([&] {
    check_ptr(tr, "trace");
    check_ptr(out, "out");
    acid::require(index < tr->trace.samples.size(), "sample index out of range");
    const auto& s = tr->trace.samples[index];
    *out = {s.t, s.consensus_sq, s.loss_mean, s.dist_opt_sq, s.grad_norm_sq_mean, s.grad_events,
            s.comm_events};
  });
}

acid_status acid_trace_summary(const acid_trace* tr, acid_summary* out) {
  return guard([&] {
    check_ptr(tr, "trace");
    check_ptr(out, "out");
    const auto& t = tr->trace;
    acid_summary s{};
    s.gamma = t.gamma;
    s.gamma_bound = t.gamma_bound;
    s.eta = t.params.eta;
    s.alpha = t.params.alpha;
    s.alpha_tilde = t.params.alpha_tilde;
    s.chi = t.params.chi;
    s.events = t.events;
    s.rejected_comm_events = t.rejected_comm_events;
    s.time_avg_grad_norm = acid::time_avg_grad_norm(t.samples);
    if (t.timing) {
      s.has_timing = 1;
      s.wall_seconds = t.timing->wall_seconds;
      s.measured_ratio = t.timing->measured_ratio;
      s.tracker_gap = t.timing->tracker_gap;
      s.ledger_rel_error = t.timing->ledger_rel_error;
    }
    *out = s;
  });
}

acid_status acid_trace_csv(const acid_trace* tr, char** out) {
  return guard([&] {
    check_ptr(tr, "trace");
    check_ptr(out, "out");
    *out = dup(acid::trace_to_csv(tr->trace));
  });
}

acid_status acid_trace_json(const acid_trace* tr, char** out) {
  return guard([&] {
    check_ptr(tr, "trace");
    check_ptr(out, "out");
    *out = dup(acid::trace_to_json(tr->trace, tr->plan));
  });
}

acid_status acid_trace_write(const acid_trace* tr, const char* csv_path, const char* json_path) {
  return guard([&] {
    check_ptr(tr, "trace");
    if (csv_path) acid::write_file_atomic(csv_path, acid::trace_to_csv(tr->trace));
    if (json_path) acid::write_file_atomic(json_path, acid::trace_to_json(tr->trace, tr->plan));
  });
}

void acid_trace_free(acid_trace* tr) { delete tr; }

acid_status acid_compare(const acid_config* cfg, char** csv_out, char** json_out) {
  return guard([&] {
    check_ptr(cfg, "cfg");
    const auto rows = acid::run_compare(cfg->plan);
    if (csv_out) *csv_out = dup(acid::compare_to_csv(rows));
    if (json_out) *json_out = dup(acid::compare_to_json(rows, cfg->plan));
  });
}

acid_status acid_write_file(const char* path, const char* content) {
  return guard([&] {
    check_ptr(path, "path");
    check_ptr(content, "content");
    acid::write_file_atomic(path, content);
  });
}

}  // extern "C"
