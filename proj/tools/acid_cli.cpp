// Experiment driver. Talks to the library only through acid.h.
#include <acid/acid.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

namespace {

struct Failure {
  acid_status status;
  std::string message;
};

void check(acid_status st) {
  if (st != ACID_OK) throw Failure{st, acid_last_error()};
}

struct ConfigPtr {
  acid_config* p = nullptr;
  ~ConfigPtr() { acid_config_free(p); }
};

std::string take(char* s) {
  std::string out = s ? s : "";
  acid_string_free(s);
  return out;
}

struct RunOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool override_gamma = false;
  unsigned jobs = 0;
};

void load(const RunOptions& opt, ConfigPtr& cfg) {
  if (opt.config_path.empty()) check(acid_config_new(&cfg.p));
  else check(acid_config_parse_file(opt.config_path.c_str(), &cfg.p));
  for (const auto& kv : opt.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Failure{ACID_ERR_INVALID_ARGUMENT, "--set expects key=value, got '" + kv + "'"};
    check(acid_config_set(cfg.p, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
  if (opt.seed) check(acid_config_set(cfg.p, "seeds", std::to_string(*opt.seed).c_str()));
  if (opt.override_gamma) check(acid_config_set(cfg.p, "override_gamma", "true"));
}

std::string output_dir(const RunOptions& opt, const acid_config* cfg) {
  if (!opt.out.empty()) return opt.out;
  if (const char* env = std::getenv("ACID_OUTPUT_DIR"); env && *env) return env;
  char* s = nullptr;
  check(acid_config_get(cfg, "output", &s));
  return take(s);
}

int run_mode(const RunOptions& opt, acid_run_kind kind, const char* name) {
  ConfigPtr cfg;
  load(opt, cfg);
  const std::string dir = output_dir(opt, cfg.p);
  std::size_t count = 0;
  check(acid_config_seed_count(cfg.p, &count));
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t k = 0; k < count; ++k) check(acid_config_seed_at(cfg.p, k, &seeds[k]));

  // Concurrent runs would distort each other's wall-clock normalization.
  unsigned jobs = opt.jobs ? opt.jobs : std::max(1u, std::thread::hardware_concurrency());
  if (kind == ACID_RUN_RUNTIME) jobs = 1;
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(seeds.size()));

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::optional<Failure> first_failure;
  std::vector<std::string> lines(seeds.size());
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < seeds.size();) {
      try {
        acid_trace* tr = nullptr;
        check(acid_run(cfg.p, kind, seeds[k], &tr));
        std::unique_ptr<acid_trace, decltype(&acid_trace_free)> guard(tr, acid_trace_free);
        const std::string stem = dir + "/" + name + "_seed" + std::to_string(seeds[k]);
        check(acid_trace_write(tr, (stem + ".csv").c_str(), (stem + ".json").c_str()));
        std::size_t n = 0;
        check(acid_trace_sample_count(tr, &n));
        acid_sample last{};
        check(acid_trace_sample(tr, n - 1, &last));
        char buf[256];
        std::snprintf(buf, sizeof buf, "seed=%llu t=%g consensus_sq=%.6g loss_mean=%.6g dist_opt_sq=%.6g -> %s.csv",
                      static_cast<unsigned long long>(seeds[k]), last.t, last.consensus_sq,
                      last.loss_mean, last.dist_opt_sq, stem.c_str());
        lines[k] = buf;
      } catch (const Failure& f) {
        std::lock_guard lock(mu);
        if (!first_failure) first_failure = f;
        next.store(seeds.size());
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < jobs; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_failure) throw *first_failure;
  for (const auto& l : lines) std::printf("%s\n", l.c_str());
  return 0;
}

int run_compare(const RunOptions& opt) {
  ConfigPtr cfg;
  load(opt, cfg);
  const std::string dir = output_dir(opt, cfg.p);
  char* csv = nullptr;
  char* json = nullptr;
  check(acid_compare(cfg.p, &csv, &json));
  const std::string csv_text = take(csv);
  const std::string json_text = take(json);
  check(acid_write_file((dir + "/compare.csv").c_str(), csv_text.c_str()));
  check(acid_write_file((dir + "/compare.json").c_str(), json_text.c_str()));
  std::printf("%s", csv_text.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asynchronous gossip SGD with continuous momentum: simulator, runtime and tools"};
  app.require_subcommand(1);

  auto* spectral = app.add_subcommand("spectral", "Print chi1, chi2, Tr(L), |L| of a topology as JSON");
  std::size_t ring = 0, complete = 0, star = 0;
  double ratio = 1.0;
  std::string spectral_config;
  auto* o_ring = spectral->add_option("--ring", ring, "Ring with N nodes");
  auto* o_complete = spectral->add_option("--complete", complete, "Complete graph with N nodes");
  auto* o_star = spectral->add_option("--star", star, "Star with N nodes");
  auto* o_cfg = spectral->add_option("--config", spectral_config, "Take the topology from a config file");
  o_ring->excludes(o_complete, o_star, o_cfg);
  o_complete->excludes(o_star, o_cfg);
  o_star->excludes(o_cfg);
  spectral->add_option("--ratio", ratio,
                       "Communications per unit time per node; edge rate is ratio / max(deg i, deg j)");

  RunOptions opt;
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "key = value config file");
    sub->add_option("--set", opt.sets, "Override one config key (key=value), repeatable");
    sub->add_option("--seed", opt.seed, "Run only this seed");
    sub->add_option("--out", opt.out, "Output directory (default: $ACID_OUTPUT_DIR, then config 'output')");
    sub->add_flag("--override-gamma", opt.override_gamma, "Allow gamma above the step-size bound");
    sub->add_option("--jobs", opt.jobs, "Seeds run concurrently (default: hardware threads)");
  };
  auto* simulate = app.add_subcommand("simulate", "Event-driven simulation, one CSV + JSON per seed");
  auto* runtime = app.add_subcommand("runtime", "Threaded wall-clock runtime, one CSV + JSON per seed");
  auto* baseline = app.add_subcommand("baseline", "Synchronous exact-averaging SGD, one CSV + JSON per seed");
  auto* compare = app.add_subcommand("compare", "Accelerated vs non-accelerated over the config's ratios");
  for (auto* sub : {simulate, runtime, baseline, compare}) add_run_flags(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*spectral) {
      acid_graph* g = nullptr;
      if (!spectral_config.empty()) {
        ConfigPtr cfg;
        check(acid_config_parse_file(spectral_config.c_str(), &cfg.p));
        check(acid_graph_from_config(cfg.p, &g));
      } else if (*o_ring) {
        check(acid_graph_build("ring", ring, ratio, &g));
      } else if (*o_complete) {
        check(acid_graph_build("complete", complete, ratio, &g));
      } else if (*o_star) {
        check(acid_graph_build("star", star, ratio, &g));
      } else {
        throw Failure{ACID_ERR_INVALID_ARGUMENT, "spectral needs --ring, --complete, --star or --config"};
      }
      std::unique_ptr<acid_graph, decltype(&acid_graph_free)> guard(g, acid_graph_free);
      acid_spectral r{};
      check(acid_graph_spectral(g, &r));
      std::printf("{\"chi1\":%.17g,\"chi2\":%.17g,\"trace_lambda\":%.17g,\"lambda_norm\":%.17g}\n", r.chi1,
                  r.chi2, r.trace_lambda, r.lambda_norm);
      return 0;
    }
    if (*simulate) return run_mode(opt, ACID_RUN_SIMULATE, "simulate");
    if (*runtime) return run_mode(opt, ACID_RUN_RUNTIME, "runtime");
    if (*baseline) return run_mode(opt, ACID_RUN_BASELINE, "baseline");
    if (*compare) return run_compare(opt);
  } catch (const Failure& f) {
    std::string msg = f.message;
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::fprintf(stderr, "error: %s: %s\n", acid_status_name(f.status), msg.c_str());
    return static_cast<int>(f.status);
  }
  return 1;
}
