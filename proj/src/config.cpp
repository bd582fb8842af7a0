#include "synq/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace synq {

RunConfig RunConfig::defaults(RegimeKind regime) {
  RunConfig c;
  c.env.ensemble = EnsembleConfig::defaults_for(regime);
  c.td3.policy_noise_sigma = 0.2 * c.env.a_max;
  c.td3.noise_clip = 0.5 * c.env.a_max;
  return c;
}

void RunConfig::validate() const {
  env.validate();
  td3.validate();
  eval.validate();
  if (train.eval_interval == 0 || train.eval_steps == 0 || train.updates_per_step == 0)
    throw InvalidConfig("train.eval_interval, train.eval_steps and train.updates_per_step must be >= 1");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view v, std::string_view key) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end || v.empty())
    throw ConfigError("invalid value '" + std::string(v) + "' for key '" + std::string(key) + "'");
  return out;
}

double parse_double(std::string_view v, std::string_view key) {
  return parse_number<double>(v, key);
}

std::size_t parse_size(std::string_view v, std::string_view key) {
  return parse_number<std::size_t>(v, key);
}

bool parse_bool(std::string_view v, std::string_view key) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("invalid boolean '" + std::string(v) + "' for key '" + std::string(key) +
                    "' (expected true or false)");
}

std::vector<std::size_t> parse_sizes(std::string_view v, std::string_view key) {
  std::vector<std::size_t> out;
  while (true) {
    const auto comma = v.find(',');
    out.push_back(parse_size(trim(v.substr(0, comma)), key));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

std::string join_sizes(const std::vector<std::size_t>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(xs[i]);
  }
  return out;
}

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

// Builders for the common field shapes.
template <typename Member>
Field real(std::string key, Member member) {
  return {key, [member](const RunConfig& c) { return format_double(member(const_cast<RunConfig&>(c))); },
          [member, key](RunConfig& c, std::string_view v) { member(c) = parse_double(v, key); }};
}

template <typename Member>
Field count(std::string key, Member member) {
  return {key, [member](const RunConfig& c) { return std::to_string(member(const_cast<RunConfig&>(c))); },
          [member, key](RunConfig& c, std::string_view v) { member(c) = parse_size(v, key); }};
}

template <typename Member>
Field flag(std::string key, Member member) {
  return {key,
          [member](const RunConfig& c) {
            return std::string(member(const_cast<RunConfig&>(c)) ? "true" : "false");
          },
          [member, key](RunConfig& c, std::string_view v) { member(c) = parse_bool(v, key); }};
}

template <typename Member>
Field text(std::string key, Member member) {
  return {key, [member](const RunConfig& c) { return member(const_cast<RunConfig&>(c)); },
          [member](RunConfig& c, std::string_view v) { member(c) = std::string(v); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"run.seed", [](const RunConfig& c) { return std::to_string(c.seed); },
       [](RunConfig& c, std::string_view v) { c.seed = parse_number<std::uint64_t>(v, "run.seed"); }},
      {"ensemble.regime", [](const RunConfig& c) { return std::string(to_string(c.env.ensemble.regime)); },
       [](RunConfig& c, std::string_view v) { c.env.ensemble.regime = parse_regime(v); }},
      count("ensemble.n_neurons", [](RunConfig& c) -> auto& { return c.env.ensemble.n_neurons; }),
      real("ensemble.coupling", [](RunConfig& c) -> auto& { return c.env.ensemble.coupling; }),
      real("ensemble.dt", [](RunConfig& c) -> auto& { return c.env.ensemble.dt; }),
      count("ensemble.substeps", [](RunConfig& c) -> auto& { return c.env.ensemble.substeps_per_env_step; }),
      real("ensemble.alpha_min", [](RunConfig& c) -> auto& { return c.env.ensemble.heterogeneity.alpha_min; }),
      real("ensemble.alpha_max", [](RunConfig& c) -> auto& { return c.env.ensemble.heterogeneity.alpha_max; }),
      real("ensemble.current_min", [](RunConfig& c) -> auto& { return c.env.ensemble.heterogeneity.current_min; }),
      real("ensemble.current_max", [](RunConfig& c) -> auto& { return c.env.ensemble.heterogeneity.current_max; }),
      count("temporal.n_parts", [](RunConfig& c) -> auto& { return c.env.temporal.n_parts; }),
      real("temporal.part_weight", [](RunConfig& c) -> auto& { return c.env.temporal.part_weight; }),
      count("temporal.onset_delay", [](RunConfig& c) -> auto& { return c.env.temporal.onset_delay; }),
      count("env.window_len", [](RunConfig& c) -> auto& { return c.env.window_len; }),
      real("env.a_max", [](RunConfig& c) -> auto& { return c.env.a_max; }),
      count("env.episode_len", [](RunConfig& c) -> auto& { return c.env.episode_len; }),
      count("env.warmup_steps", [](RunConfig& c) -> auto& { return c.env.warmup_steps; }),
      flag("env.clamp_actions", [](RunConfig& c) -> auto& { return c.env.clamp_actions; }),
      real("td3.gamma", [](RunConfig& c) -> auto& { return c.td3.gamma; }),
      real("td3.tau", [](RunConfig& c) -> auto& { return c.td3.tau; }),
      real("td3.policy_noise_sigma", [](RunConfig& c) -> auto& { return c.td3.policy_noise_sigma; }),
      real("td3.noise_clip", [](RunConfig& c) -> auto& { return c.td3.noise_clip; }),
      real("td3.exploration_sigma", [](RunConfig& c) -> auto& { return c.td3.exploration_sigma; }),
      count("td3.policy_delay", [](RunConfig& c) -> auto& { return c.td3.policy_delay; }),
      count("td3.batch_size", [](RunConfig& c) -> auto& { return c.td3.batch_size; }),
      count("td3.buffer_capacity", [](RunConfig& c) -> auto& { return c.td3.buffer_capacity; }),
      count("td3.learn_start", [](RunConfig& c) -> auto& { return c.td3.learn_start; }),
      real("td3.actor_lr", [](RunConfig& c) -> auto& { return c.td3.actor_lr; }),
      real("td3.critic_lr", [](RunConfig& c) -> auto& { return c.td3.critic_lr; }),
      {"td3.hidden", [](const RunConfig& c) { return join_sizes(c.td3.hidden); },
       [](RunConfig& c, std::string_view v) { c.td3.hidden = parse_sizes(v, "td3.hidden"); }},
      flag("td3.truncate_on_done", [](RunConfig& c) -> auto& { return c.td3.truncate_on_done; }),
      real("td3.preact_penalty", [](RunConfig& c) -> auto& { return c.td3.preact_penalty; }),
      count("eval.pre_steps", [](RunConfig& c) -> auto& { return c.eval.pre_steps; }),
      count("eval.post_steps", [](RunConfig& c) -> auto& { return c.eval.post_steps; }),
      count("eval.transient", [](RunConfig& c) -> auto& { return c.eval.transient; }),
      count("eval.measure_window", [](RunConfig& c) -> auto& { return c.eval.measure_window; }),
      count("train.eval_interval", [](RunConfig& c) -> auto& { return c.train.eval_interval; }),
      count("train.eval_steps", [](RunConfig& c) -> auto& { return c.train.eval_steps; }),
      count("train.updates_per_step", [](RunConfig& c) -> auto& { return c.train.updates_per_step; }),
      text("output.checkpoint", [](RunConfig& c) -> auto& { return c.output.checkpoint; }),
      text("output.log", [](RunConfig& c) -> auto& { return c.output.log; }),
      text("output.trace", [](RunConfig& c) -> auto& { return c.output.trace; }),
      text("output.report", [](RunConfig& c) -> auto& { return c.output.report; }),
      text("output.plot", [](RunConfig& c) -> auto& { return c.output.plot; }),
  };
  return table;
}

const Field* find_field(std::string_view key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

struct Entry {
  std::string key;
  std::string value;
  std::size_t line;
};

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
  }();
  return keys;
}

RunConfig parse_config(std::string_view text) {
  std::vector<Entry> entries;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("expected 'key = value'", line_no);
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("missing key before '='", line_no);
    if (!find_field(key)) throw ConfigError("unknown key '" + key + "'", line_no);
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line_no);
    entries.push_back({key, value, line_no});
  }

  // Regime and a_max first: other defaults are derived from them.
  RegimeKind regime = RegimeKind::Regular;
  for (const auto& e : entries) {
    if (e.key != "ensemble.regime") continue;
    try {
      regime = parse_regime(e.value);
    } catch (const InvalidConfig& ex) {
      throw ConfigError(ex.what(), e.line);
    }
  }
  RunConfig cfg = RunConfig::defaults(regime);
  for (const auto& e : entries) {
    if (e.key != "env.a_max") continue;
    try {
      cfg.env.a_max = parse_double(e.value, e.key);
    } catch (const ConfigError& ex) {
      throw ConfigError(ex.what(), e.line);
    }
    cfg.td3.policy_noise_sigma = 0.2 * cfg.env.a_max;
    cfg.td3.noise_clip = 0.5 * cfg.env.a_max;
  }
  for (const auto& e : entries) {
    try {
      find_field(e.key)->set(cfg, e.value);
    } catch (const ConfigError& ex) {
      throw ConfigError(ex.what(), e.line);
    } catch (const InvalidConfig& ex) {
      throw ConfigError(ex.what(), e.line);
    }
  }
  try {
    cfg.validate();
  } catch (const InvalidConfig& ex) {
    throw ConfigError(ex.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_text(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

}  // namespace synq
