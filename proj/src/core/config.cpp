#include "macpo/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace macpo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto s = trim(v);
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("config key '" + key + "': cannot parse value '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  const auto s = trim(v);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
}

struct Field {
  std::string name;  // section.key
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <class Access>
Field num_field(std::string name, Access access) {
  using T = std::remove_cvref_t<decltype(access(std::declval<RunConfig&>()))>;
  Field f;
  f.name = name;
  f.get = [access](const RunConfig& c) {
    const T& v = access(const_cast<RunConfig&>(c));
    if constexpr (std::is_same_v<T, bool>) {
      return std::string(v ? "true" : "false");
    } else if constexpr (std::is_floating_point_v<T>) {
      return fmt_double(v);
    } else {
      return std::to_string(v);
    }
  };
  f.set = [access, name](RunConfig& c, const std::string& v) {
    if constexpr (std::is_same_v<T, bool>) {
      access(c) = parse_bool(name, v);
    } else {
      access(c) = parse_number<T>(name, v);
    }
  };
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> t;
    Field variant;
    variant.name = "env.variant";
    variant.get = [](const RunConfig& c) { return to_string(c.env.variant); };
    variant.set = [](RunConfig& c, const std::string& v) {
      try {
        c.env.variant = env_variant_from_string(trim(v));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("config key 'env.variant': " + std::string(e.what()));
      }
    };
    t.push_back(variant);
    t.push_back(num_field("env.grid_w", [](RunConfig& c) -> auto& { return c.env.grid_w; }));
    t.push_back(num_field("env.grid_h", [](RunConfig& c) -> auto& { return c.env.grid_h; }));
    t.push_back(num_field("env.n_agents", [](RunConfig& c) -> auto& { return c.env.n_agents; }));
    t.push_back(num_field("env.n_prey", [](RunConfig& c) -> auto& { return c.env.n_prey; }));
    t.push_back(num_field("env.punishment", [](RunConfig& c) -> auto& { return c.env.punishment; }));
    t.push_back(num_field("env.capture_reward", [](RunConfig& c) -> auto& { return c.env.capture_reward; }));
    t.push_back(num_field("env.obs_size", [](RunConfig& c) -> auto& { return c.env.obs_size; }));
    t.push_back(num_field("env.episode_limit", [](RunConfig& c) -> auto& { return c.env.episode_limit; }));
    t.push_back(num_field("env.matrix_actions", [](RunConfig& c) -> auto& { return c.env.matrix_actions; }));
    Field payoff;
    payoff.name = "env.payoff";
    payoff.get = [](const RunConfig& c) {
      std::string s;
      for (std::size_t i = 0; i < c.env.payoff.size(); ++i) s += (i ? "," : "") + fmt_double(c.env.payoff[i]);
      return s;
    };
    payoff.set = [](RunConfig& c, const std::string& v) {
      c.env.payoff.clear();
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!trim(item).empty()) c.env.payoff.push_back(parse_number<double>("env.payoff", item));
    };
    t.push_back(payoff);

    t.push_back(num_field("learner.batch_size", [](RunConfig& c) -> auto& { return c.batch_size; }));
    t.push_back(num_field("learner.buffer_capacity", [](RunConfig& c) -> auto& { return c.buffer_capacity; }));
    t.push_back(num_field("learner.target_update_interval",
                          [](RunConfig& c) -> auto& { return c.target_update_interval; }));
    t.push_back(num_field("learner.learning_rate", [](RunConfig& c) -> auto& { return c.learning_rate; }));
    t.push_back(num_field("learner.td_lambda", [](RunConfig& c) -> auto& { return c.td_lambda; }));
    t.push_back(num_field("learner.gamma", [](RunConfig& c) -> auto& { return c.gamma; }));
    t.push_back(num_field("learner.epsilon_start", [](RunConfig& c) -> auto& { return c.epsilon_start; }));
    t.push_back(num_field("learner.epsilon_finish", [](RunConfig& c) -> auto& { return c.epsilon_finish; }));
    t.push_back(num_field("learner.epsilon_anneal_steps",
                          [](RunConfig& c) -> auto& { return c.epsilon_anneal_steps; }));
    t.push_back(num_field("learner.double_q", [](RunConfig& c) -> auto& { return c.double_q; }));
    t.push_back(num_field("learner.grad_clip", [](RunConfig& c) -> auto& { return c.grad_clip; }));
    t.push_back(num_field("learner.agent_hidden", [](RunConfig& c) -> auto& { return c.agent_hidden; }));
    t.push_back(num_field("learner.mixer_embed", [](RunConfig& c) -> auto& { return c.mixer_embed; }));
    t.push_back(num_field("learner.hypernet_hidden", [](RunConfig& c) -> auto& { return c.hypernet_hidden; }));
    t.push_back(num_field("learner.central_hidden", [](RunConfig& c) -> auto& { return c.central_hidden; }));

    Field scheme;
    scheme.name = "priority.scheme";
    scheme.get = [](const RunConfig& c) { return to_string(c.scheme); };
    scheme.set = [](RunConfig& c, const std::string& v) {
      try {
        c.scheme = scheme_from_string(trim(v));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("config key 'priority.scheme': " + std::string(e.what()));
      }
    };
    t.push_back(scheme);
    t.push_back(num_field("priority.eps_low", [](RunConfig& c) -> auto& { return c.thresholds.eps_low; }));
    t.push_back(num_field("priority.eps_high", [](RunConfig& c) -> auto& { return c.thresholds.eps_high; }));
    t.push_back(num_field("priority.alpha_high", [](RunConfig& c) -> auto& { return c.thresholds.alpha_high; }));
    t.push_back(
        num_field("priority.alpha_medium", [](RunConfig& c) -> auto& { return c.thresholds.alpha_medium; }));
    t.push_back(num_field("priority.alpha_low", [](RunConfig& c) -> auto& { return c.thresholds.alpha_low; }));
    t.push_back(num_field("priority.pser_decay", [](RunConfig& c) -> auto& { return c.pser_decay; }));
    t.push_back(num_field("priority.pser_window", [](RunConfig& c) -> auto& { return c.pser_window; }));
    t.push_back(num_field("priority.weight_cap", [](RunConfig& c) -> auto& { return c.weight_cap; }));

    t.push_back(num_field("run.seed", [](RunConfig& c) -> auto& { return c.seed; }));
    t.push_back(num_field("run.t_max", [](RunConfig& c) -> auto& { return c.t_max; }));
    t.push_back(num_field("run.eval_interval", [](RunConfig& c) -> auto& { return c.eval_interval; }));
    t.push_back(num_field("run.eval_episodes", [](RunConfig& c) -> auto& { return c.eval_episodes; }));
    t.push_back(num_field("run.checkpoint_interval", [](RunConfig& c) -> auto& { return c.checkpoint_interval; }));
    return t;
  }();
  return table;
}

const Field& find_field(const std::string& name) {
  for (const auto& f : fields())
    if (f.name == name) return f;
  throw ConfigError("unknown config key '" + name + "'");
}

}  // namespace

void RunConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ConfigError("config key '" + key + "': " + why);
  };
  try {
    env.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config section 'env': ") + e.what());
  }
  try {
    thresholds.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config section 'priority': ") + e.what());
  }
  if (batch_size <= 0) fail("learner.batch_size", "must be positive");
  if (buffer_capacity <= 0) fail("learner.buffer_capacity", "must be positive");
  if (target_update_interval <= 0) fail("learner.target_update_interval", "must be positive");
  if (!(learning_rate > 0.0)) fail("learner.learning_rate", "must be positive");
  if (!(td_lambda >= 0.0 && td_lambda <= 1.0)) fail("learner.td_lambda", "must lie in [0,1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("learner.gamma", "must lie in [0,1)");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0)) fail("learner.epsilon_start", "must lie in [0,1]");
  if (!(epsilon_finish >= 0.0 && epsilon_finish <= 1.0)) fail("learner.epsilon_finish", "must lie in [0,1]");
  if (epsilon_anneal_steps < 0) fail("learner.epsilon_anneal_steps", "must be nonnegative");
  if (!(grad_clip >= 0.0)) fail("learner.grad_clip", "must be nonnegative (0 disables)");
  if (agent_hidden <= 0 || mixer_embed <= 0 || hypernet_hidden <= 0 || central_hidden <= 0)
    fail("learner.*_hidden", "hidden sizes must be positive");
  if (!(pser_decay >= 0.0 && pser_decay <= 1.0)) fail("priority.pser_decay", "must lie in [0,1]");
  if (pser_window < 0) fail("priority.pser_window", "must be nonnegative");
  if (!(weight_cap >= 0.0)) fail("priority.weight_cap", "must be nonnegative (0 disables)");
  if (t_max <= 0) fail("run.t_max", "must be positive");
  if (eval_interval <= 0) fail("run.eval_interval", "must be positive");
  if (eval_episodes <= 0) fail("run.eval_episodes", "must be positive");
  if (checkpoint_interval < 0) fail("run.checkpoint_interval", "must be nonnegative");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "env" && section != "learner" && section != "priority" && section != "run")
        throw ConfigError("unknown config section '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full = key.find('.') == std::string::npos ? section + "." + key : key;
    if (section.empty() && key.find('.') == std::string::npos)
      throw ConfigError("config key '" + key + "' appears outside any section");
    find_field(full).set(cfg, value);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    const auto dot = f.name.find('.');
    const std::string sec = f.name.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out += "\n";
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += f.name.substr(dot + 1) + " = " + f.get(cfg) + "\n";
  }
  return out;
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
  find_field(trim(assignment.substr(0, eq))).set(cfg, assignment.substr(eq + 1));
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.push_back(f.name);
  return out;
}

}  // namespace macpo
