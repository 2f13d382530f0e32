#pragma once

// Flat `key = value` training configuration files. '#' starts a comment;
// blank lines are ignored; unknown keys and repeated keys are errors.

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "talkitout/errors.hpp"
#include "talkitout/learner/train.hpp"
#include "talkitout/serialize.hpp"

namespace talkitout {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  int lineno = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++lineno;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty() || value.empty()) throw ParseError("line " + std::to_string(lineno) + ": empty key or value");
    if (!kv.emplace(key, value).second) throw ParseError("line " + std::to_string(lineno) + ": duplicate key " + key);
  }
  return kv;
}

namespace detail {

template <typename T>
T parse_integer(const std::string& key, const std::string& v) {
  T out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) throw ParseError(key + ": not an integer: " + v);
  return out;
}

inline double parse_real(const std::string& key, const std::string& v) {
  try {
    return parse_decimal(v);
  } catch (const ParseError&) {
    throw ParseError(key + ": not a number: " + v);
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ParseError(key + ": not a boolean: " + v);
}

}  // namespace detail

// Setting expl_bonus.C or expl_bonus.M implies expl_bonus = on unless
// expl_bonus is given explicitly.
inline void apply_config(const std::map<std::string, std::string>& kv, learner::TrainConfig& c) {
  using namespace detail;
  BonusConfig bonus = c.bonus.value_or(BonusConfig{});
  bool bonus_on = c.bonus.has_value();
  for (const auto& [k, v] : kv) {
    if (k == "learning_rate") c.learning_rate = parse_real(k, v);
    else if (k == "gae_lambda") c.gae_lambda = parse_real(k, v);
    else if (k == "clip_epsilon") c.clip_epsilon = parse_real(k, v);
    else if (k == "optimizer_epsilon") c.optimizer_epsilon = parse_real(k, v);
    else if (k == "batch_size") c.batch_size = parse_integer<int>(k, v);
    else if (k == "gamma") c.gamma = parse_real(k, v);
    else if (k == "epochs_per_update") c.epochs = parse_integer<int>(k, v);
    else if (k == "minibatches") c.minibatches = parse_integer<int>(k, v);
    else if (k == "value_coef") c.value_coef = parse_real(k, v);
    else if (k == "entropy_coef") c.entropy_coef = parse_real(k, v);
    else if (k == "max_grad_norm") c.max_grad_norm = parse_real(k, v);
    else if (k == "hidden") c.hidden = parse_integer<int>(k, v);
    else if (k == "num_envs") c.num_envs = parse_integer<int>(k, v);
    else if (k == "total_steps") c.total_steps = parse_integer<long>(k, v);
    else if (k == "seed") c.seed = parse_integer<std::uint64_t>(k, v);
    else if (k == "workers") c.workers = parse_integer<unsigned>(k, v);
    else if (k == "variant") c.env.variant = parse_variant(v);
    else if (k == "history_mode") c.env.history_mode = parse_history_mode(v);
    else if (k == "t_max") c.env.t_max = parse_integer<int>(k, v);
    else if (k == "expl_bonus") continue;
    else if (k == "expl_bonus.C") { bonus.C = parse_real(k, v); bonus_on = true; }
    else if (k == "expl_bonus.M") { bonus.M = parse_real(k, v); bonus_on = true; }
    else throw ParseError("unknown config key: " + k);
  }
  if (const auto it = kv.find("expl_bonus"); it != kv.end()) bonus_on = parse_bool(it->first, it->second);
  c.bonus = bonus_on ? std::optional<BonusConfig>(bonus) : std::nullopt;
  learner::validate(c);
}

inline learner::TrainConfig parse_train_config(std::string_view text, learner::TrainConfig base = {}) {
  apply_config(parse_key_values(text), base);
  return base;
}

inline learner::TrainConfig load_train_config(const std::string& path, learner::TrainConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_train_config(ss.str(), std::move(base));
}

}  // namespace talkitout
