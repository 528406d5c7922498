#pragma once

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bpo/train/config.hpp"

namespace bpo::cli {

// Config files are INI: one [section] per module, `key = value` lines, `;` or
// `#` comments. Every key is optional except env.name; missing keys take the
// per-environment defaults. Command-line overrides use dotted paths
// (`train.n_itr=50`).

enum class FieldKind { kInt, kUint, kDouble, kBool, kString };

struct ConfigField {
  std::string key;  // section.name
  FieldKind kind;
  std::string help;
  std::function<void(TrainConfig&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

namespace detail {

inline std::string kind_name(FieldKind k) {
  switch (k) {
    case FieldKind::kInt: return "integer";
    case FieldKind::kUint: return "unsigned integer";
    case FieldKind::kDouble: return "number";
    case FieldKind::kBool: return "boolean";
    case FieldKind::kString: return "string";
  }
  return "?";
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_integer(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && !s.empty();
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

inline bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return out = true, true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return out = false, true;
  return false;
}

/// Shortest text that reads back as the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

[[noreturn]] inline void type_error(const std::string& key, FieldKind kind, const std::string& value) {
  throw ConfigError("config key '" + key + "': expected " + kind_name(kind) + ", got '" + value + "'");
}

template <typename T>
ConfigField int_field(std::string key, std::string help, T TrainConfig::*member) {
  return {key, std::is_unsigned_v<T> ? FieldKind::kUint : FieldKind::kInt, std::move(help),
          [key, member](TrainConfig& c, const std::string& v) {
            T x{};
            if (!parse_integer(v, x)) type_error(key, std::is_unsigned_v<T> ? FieldKind::kUint : FieldKind::kInt, v);
            c.*member = x;
          },
          [member](const TrainConfig& c) { return std::to_string(c.*member); }};
}

inline ConfigField double_field(std::string key, std::string help, double TrainConfig::*member) {
  return {key, FieldKind::kDouble, std::move(help),
          [key, member](TrainConfig& c, const std::string& v) {
            if (!parse_double(v, c.*member)) type_error(key, FieldKind::kDouble, v);
          },
          [member](const TrainConfig& c) { return format_double(c.*member); }};
}

inline ConfigField bool_field(std::string key, std::string help, bool TrainConfig::*member) {
  return {key, FieldKind::kBool, std::move(help),
          [key, member](TrainConfig& c, const std::string& v) {
            if (!parse_bool(v, c.*member)) type_error(key, FieldKind::kBool, v);
          },
          [member](const TrainConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

inline ConfigField env_double_field(std::string key, std::string help, double EnvConfig::*member) {
  return {key, FieldKind::kDouble, std::move(help),
          [key, member](TrainConfig& c, const std::string& v) {
            if (!parse_double(v, c.env.*member)) type_error(key, FieldKind::kDouble, v);
          },
          [member](const TrainConfig& c) { return format_double(c.env.*member); }};
}

}  // namespace detail

/// The canonical schema. Order here is the order of written config files.
inline const std::vector<ConfigField>& config_schema() {
  using namespace detail;
  static const std::vector<ConfigField> schema = {
      {"env.name", FieldKind::kString, "tiger | chain | light_dark",
       [](TrainConfig& c, const std::string& v) { c.env.id = parse_env_id(v); },
       [](const TrainConfig& c) { return to_string(c.env.id); }},
      env_double_field("env.listen_accuracy", "Tiger: probability a listen reports the correct side",
                       &EnvConfig::listen_accuracy),
      {"env.chain_mode", FieldKind::kString, "Chain: tied | semitied",
       [](TrainConfig& c, const std::string& v) { c.env.chain_mode = parse_chain_mode(v); },
       [](const TrainConfig& c) { return to_string(c.env.chain_mode); }},
      env_double_field("env.noise_floor", "Light-Dark: constant c in w(x) = (x-5)^2/2 + c", &EnvConfig::noise_floor),
      env_double_field("env.action_bound", "Light-Dark: per-component action clip", &EnvConfig::action_bound),

      {"train.algorithm", FieldKind::kString, "bpo | bpo_minus | upmle | robust_ensemble | nominal",
       [](TrainConfig& c, const std::string& v) { c.algorithm = parse_algorithm(v); },
       [](const TrainConfig& c) { return to_string(c.algorithm); }},
      int_field("train.horizon", "episode length H", &TrainConfig::horizon),
      int_field("train.batch_size", "environment steps per iteration", &TrainConfig::batch_size),
      int_field("train.n_itr", "optimizer iterations", &TrainConfig::n_itr),
      double_field("train.discount", "discount factor gamma", &TrainConfig::discount),
      int_field("train.bins", "latent bins per continuous dimension (K)", &TrainConfig::bins),
      int_field("train.seed", "first training seed", &TrainConfig::seed),
      int_field("train.n_seeds", "seeds trained; the best by evaluation is reported", &TrainConfig::n_seeds),
      int_field("train.workers", "rollout threads (results do not depend on it)", &TrainConfig::workers),
      bool_field("train.freeze_belief", "ablation: keep the prior belief, never call the filter",
                 &TrainConfig::freeze_belief),
      bool_field("train.strict_filter", "abort on zero-likelihood evidence instead of keeping the prior",
                 &TrainConfig::strict_filter),

      double_field("trpo.step_size", "mean-KL trust region", &TrainConfig::step_size),
      double_field("trpo.gae_lambda", "GAE lambda", &TrainConfig::gae_lambda),
      double_field("trpo.cg_damping", "Fisher damping", &TrainConfig::cg_damping),
      int_field("trpo.cg_iters", "conjugate-gradient iterations", &TrainConfig::cg_iters),
      double_field("trpo.backtrack_ratio", "line-search shrink factor", &TrainConfig::backtrack_ratio),
      int_field("trpo.max_backtracks", "line-search attempts", &TrainConfig::max_backtracks),

      int_field("baseline.epochs", "value regression epochs per iteration", &TrainConfig::vf_epochs),
      double_field("baseline.learning_rate", "value regression Adam step", &TrainConfig::vf_learning_rate),
      int_field("baseline.minibatch", "value regression minibatch", &TrainConfig::vf_minibatch),

      int_field("net.hidden", "units per hidden layer (N_h)", &TrainConfig::hidden),
      double_field("net.policy_output_gain", "init gain of the policy output layer", &TrainConfig::policy_output_gain),

      int_field("eval.episodes", "evaluation episodes", &TrainConfig::eval_episodes),
      int_field("eval.seed", "evaluation seed", &TrainConfig::eval_seed),
  };
  return schema;
}

inline const ConfigField& schema_field(const std::string& key) {
  for (const auto& f : config_schema())
    if (f.key == key) return f;
  throw ConfigError("unknown config key '" + key + "'");
}

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Parses `key=value` overrides.
inline KeyValues parse_overrides(const std::vector<std::string>& overrides) {
  KeyValues out;
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not of the form section.key=value");
    out.emplace_back(detail::trim(o.substr(0, eq)), detail::trim(o.substr(eq + 1)));
  }
  return out;
}

/// Builds a config: per-environment defaults, then `entries` in order.
/// env.name must appear among the entries; unknown keys are rejected by name.
inline TrainConfig build_config(const KeyValues& entries) {
  std::string env_name;
  for (const auto& [k, v] : entries)
    if (k == "env.name") env_name = v;
  if (env_name.empty()) throw ConfigError("config key 'env.name' is required");
  TrainConfig c = TrainConfig::defaults(parse_env_id(env_name));
  for (const auto& [k, v] : entries) schema_field(k).set(c, v);
  c.validate();
  return c;
}

inline KeyValues read_ini(std::istream& is) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config syntax error at line " + std::to_string(e.line()) + ": " + e.message());
  }
  KeyValues out;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config key '" + section + "' must be inside a [section]");
    for (const auto& [key, value] : body) out.emplace_back(section + "." + key, detail::trim(value.data()));
  }
  return out;
}

inline KeyValues read_ini_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  return read_ini(is);
}

inline TrainConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  KeyValues entries = read_ini_file(path);
  for (auto& kv : parse_overrides(overrides)) entries.push_back(std::move(kv));
  return build_config(entries);
}

/// Every schema key with its current value, in schema order.
inline KeyValues config_entries(const TrainConfig& c) {
  KeyValues out;
  for (const auto& f : config_schema()) out.emplace_back(f.key, f.get(c));
  return out;
}

inline void write_ini(std::ostream& os, const TrainConfig& c) {
  std::string section;
  for (const auto& [key, value] : config_entries(c)) {
    const auto dot = key.find('.');
    const std::string s = key.substr(0, dot);
    if (s != section) {
      os << (section.empty() ? "" : "\n") << '[' << s << "]\n";
      section = s;
    }
    os << key.substr(dot + 1) << " = " << value << '\n';
  }
}

}  // namespace bpo::cli
