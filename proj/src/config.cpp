#include "acid/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "acid/error.hpp"

namespace acid {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  fail(ErrorCode::invalid_config, "key '" + std::string(key) + "': expected " + std::string(want) +
                                      ", got '" + std::string(value) + "'");
}

double to_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) bad_value(key, value, "a number");
  return out;
}

std::uint64_t to_uint(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "a non-negative integer");
  return out;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "true or false");
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto pos = s.find(sep);
    const auto part = trim(s.substr(0, pos));
    if (!part.empty()) parts.push_back(part);
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return parts;
}

// "0,1,5" or "0..19" or a mix.
std::vector<std::uint64_t> to_seeds(std::string_view key, std::string_view value) {
  std::vector<std::uint64_t> seeds;
  for (auto part : split(value, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string_view::npos) {
      seeds.push_back(to_uint(key, part));
      continue;
    }
    const auto lo = to_uint(key, trim(part.substr(0, dots)));
    const auto hi = to_uint(key, trim(part.substr(dots + 2)));
    if (hi < lo) bad_value(key, value, "an increasing range");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) bad_value(key, value, "at least one seed");
  return seeds;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const auto& values, auto&& each) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ',';
    out += each(v);
  }
  return out;
}

template <class F>
decltype(auto) parse_enum(std::string_view key, std::string_view value, F&& parse) {
  try {
    return parse(value);
  } catch (const Error&) {
    bad_value(key, value, "a known name");
  }
}

struct Handler {
  std::function<void(RunPlan&, std::string_view, std::string_view)> set;
  std::function<std::string(const RunPlan&)> get;
};

const std::vector<std::pair<std::string_view, Handler>>& handlers() {
  using V = std::string_view;
  static const std::vector<std::pair<std::string_view, Handler>> table = {
      {"topology",
       {[](RunPlan& p, V k, V v) { p.experiment().graph.kind = parse_enum(k, v, parse_topology_kind); },
        [](const RunPlan& p) { return std::string(to_string(p.experiment().graph.kind)); }}},
      {"nodes",
       {[](RunPlan& p, V k, V v) { p.experiment().graph.n = to_uint(k, v); },
        [](const RunPlan& p) { return std::to_string(p.experiment().graph.n); }}},
      {"ratio",
       {[](RunPlan& p, V k, V v) { p.experiment().graph.ratio = to_double(k, v); },
        [](const RunPlan& p) { return fmt(p.experiment().graph.ratio); }}},
      {"edges",
       {[](RunPlan& p, V k, V v) {
          auto& edges = p.experiment().graph.edges;
          edges.clear();
          for (auto part : split(v, ',')) {
            const auto dash = part.find('-');
            if (dash == V::npos) bad_value(k, v, "pairs like 0-1,1-2");
            edges.emplace_back(to_uint(k, trim(part.substr(0, dash))),
                               to_uint(k, trim(part.substr(dash + 1))));
          }
        },
        [](const RunPlan& p) {
          return join(p.experiment().graph.edges, [](const auto& e) {
            return std::to_string(e.first) + "-" + std::to_string(e.second);
          });
        }}},
      {"objective",
       {[](RunPlan& p, V k, V v) { p.experiment().objective.kind = parse_enum(k, v, parse_objective_kind); },
        [](const RunPlan& p) { return std::string(to_string(p.experiment().objective.kind)); }}},
      {"dim",
       {[](RunPlan& p, V k, V v) { p.experiment().objective.d = to_uint(k, v); },
        [](const RunPlan& p) { return std::to_string(p.experiment().objective.d); }}},
      {"mu",
       {[](RunPlan& p, V k, V v) { p.experiment().objective.mu = to_double(k, v); },
        [](const RunPlan& p) { return fmt(p.experiment().objective.mu); }}},
      {"L",
       {[](RunPlan& p, V k, V v) { p.experiment().objective.L = to_double(k, v); },
        [](const RunPlan& p) { return fmt(p.experiment().objective.L); }}},
      {"epsilon",
       {[](RunPlan& p, V k, V v) { p.experiment().objective.epsilon = to_double(k, v); },
        [](const RunPlan& p) { return fmt(p.experiment().objective.epsilon); }}},
      {"zeta",
       {[](RunPlan& p, V k, V v) { p.experiment().objective.zeta = to_double(k, v); },
        [](const RunPlan& p) { return fmt(p.experiment().objective.zeta); }}},
      {"sigma",
       {[](RunPlan& p, V k, V v) { p.experiment().objective.sigma = to_double(k, v); },
        [](const RunPlan& p) { return fmt(p.experiment().objective.sigma); }}},
      {"objective_seed",
       {[](RunPlan& p, V k, V v) { p.experiment().objective.seed = to_uint(k, v); },
        [](const RunPlan& p) { return std::to_string(p.experiment().objective.seed); }}},
      {"regime",
       {[](RunPlan& p, V k, V v) { p.experiment().regime = parse_enum(k, v, parse_regime); },
        [](const RunPlan& p) { return std::string(to_string(p.experiment().regime)); }}},
      {"gamma",
       {[](RunPlan& p, V k, V v) {
          if (v == "auto") p.experiment().gamma.reset();
          else p.experiment().gamma = to_double(k, v);
        },
        [](const RunPlan& p) {
          return p.experiment().gamma ? fmt(*p.experiment().gamma) : std::string("auto");
        }}},
      {"c_nonconvex",
       {[](RunPlan& p, V k, V v) { p.experiment().c_nonconvex = to_double(k, v); },
        [](const RunPlan& p) { return fmt(p.experiment().c_nonconvex); }}},
      {"horizon",
       {[](RunPlan& p, V k, V v) { p.experiment().horizon = to_double(k, v); },
        [](const RunPlan& p) { return fmt(p.experiment().horizon); }}},
      {"seeds",
       {[](RunPlan& p, V k, V v) { p.seeds = to_seeds(k, v); },
        [](const RunPlan& p) { return join(p.seeds, [](auto s) { return std::to_string(s); }); }}},
      {"accelerated",
       {[](RunPlan& p, V k, V v) { p.experiment().accelerated = to_bool(k, v); },
        [](const RunPlan& p) { return std::string(p.experiment().accelerated ? "true" : "false"); }}},
      {"sample_period",
       {[](RunPlan& p, V k, V v) { p.experiment().sample_period = to_double(k, v); },
        [](const RunPlan& p) { return fmt(p.experiment().sample_period); }}},
      {"pairing",
       {[](RunPlan& p, V k, V v) { p.experiment().pairing = parse_enum(k, v, parse_pairing_mode); },
        [](const RunPlan& p) { return std::string(to_string(p.experiment().pairing)); }}},
      {"comm_duration",
       {[](RunPlan& p, V k, V v) { p.experiment().comm_duration = to_double(k, v); },
        [](const RunPlan& p) { return fmt(p.experiment().comm_duration); }}},
      {"init_spread",
       {[](RunPlan& p, V k, V v) { p.experiment().init_spread = to_double(k, v); },
        [](const RunPlan& p) { return fmt(p.experiment().init_spread); }}},
      {"override_gamma",
       {[](RunPlan& p, V k, V v) { p.experiment().override_gamma = to_bool(k, v); },
        [](const RunPlan& p) { return std::string(p.experiment().override_gamma ? "true" : "false"); }}},
      {"ratios",
       {[](RunPlan& p, V k, V v) {
          p.ratios.clear();
          for (auto part : split(v, ',')) p.ratios.push_back(to_double(k, part));
          if (p.ratios.empty()) bad_value(k, v, "at least one ratio");
        },
        [](const RunPlan& p) { return join(p.ratios, [](double r) { return fmt(r); }); }}},
      {"threshold",
       {[](RunPlan& p, V k, V v) { p.threshold = to_double(k, v); },
        [](const RunPlan& p) { return fmt(p.threshold); }}},
      {"output",
       {[](RunPlan& p, V, V v) { p.output = std::string(v); },
        [](const RunPlan& p) { return p.output; }}},
      {"ratio_control",
       {[](RunPlan& p, V k, V v) { p.runtime.control = parse_enum(k, v, parse_ratio_control); },
        [](const RunPlan& p) { return std::string(to_string(p.runtime.control)); }}},
      {"target_ratio",
       {[](RunPlan& p, V k, V v) {
          if (v == "auto") p.runtime.target_ratio.reset();
          else p.runtime.target_ratio = to_double(k, v);
        },
        [](const RunPlan& p) {
          return p.runtime.target_ratio ? fmt(*p.runtime.target_ratio) : std::string("auto");
        }}},
      {"grad_duration_us",
       {[](RunPlan& p, V k, V v) { p.runtime.grad_duration_s = to_double(k, v) * 1e-6; },
        [](const RunPlan& p) { return fmt(p.runtime.grad_duration_s * 1e6); }}},
      {"grad_duration_dist",
       {[](RunPlan& p, V k, V v) { p.runtime.duration_dist = parse_enum(k, v, parse_duration_distribution); },
        [](const RunPlan& p) { return std::string(to_string(p.runtime.duration_dist)); }}},
      {"rendezvous_timeout_ms",
       {[](RunPlan& p, V k, V v) { p.runtime.rendezvous_timeout_s = to_double(k, v) * 1e-3; },
        [](const RunPlan& p) { return fmt(p.runtime.rendezvous_timeout_s * 1e3); }}},
  };
  return table;
}

const Handler& handler(std::string_view key) {
  for (const auto& [name, h] : handlers()) {
    if (name == key) return h;
  }
  fail(ErrorCode::invalid_config, "unknown config key '" + std::string(key) + "'");
}

}  // namespace

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = [] {
    std::vector<std::string_view> out;
    for (const auto& entry : handlers()) out.push_back(entry.first);
    return out;
  }();
  return keys;
}

void set_config_value(RunPlan& plan, std::string_view key, std::string_view value) {
  handler(key).set(plan, key, trim(value));
}

std::string get_config_value(const RunPlan& plan, std::string_view key) {
  return handler(key).get(plan);
}

RunPlan parse_config(std::string_view text) {
  RunPlan plan;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  for (std::string_view rest = text; !rest.empty();) {
    const auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) {
      fail(ErrorCode::invalid_config, where + "expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    if (!seen.insert(std::string(key)).second) {
      fail(ErrorCode::invalid_config, where + "duplicate key '" + std::string(key) + "'");
    }
    try {
      set_config_value(plan, key, line.substr(eq + 1));
    } catch (const Error& e) {
      fail(ErrorCode::invalid_config, where + e.what());
    }
  }
  return plan;
}

RunPlan load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_text(const RunPlan& plan) {
  std::string out;
  for (const auto& [name, h] : handlers()) {
    const auto value = h.get(plan);
    if (value.empty()) continue;
    out += std::string(name) + " = " + value + "\n";
  }
  return out;
}

}  // namespace acid
