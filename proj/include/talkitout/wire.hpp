#pragma once

// Line-delimited JSON protocol over a pair of streams.
//
// Requests:  {"cmd":"reset","seed":7,"variant":"original","history_mode":"current"}
//            {"cmd":"step","action":[p, tmpl, noun]}     (-1 = undefined slot)
//            {"cmd":"close"}
// Responses: {"obs":{...},"reward":"<decimal>","done":bool,"info":{"success":bool,"t":int}}
//            {"error":{"code":"parse"|"action"|"state"|"request","message":"..."}}
//            {"closed":true}

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include "talkitout/errors.hpp"
#include "talkitout/serialize.hpp"
#include "talkitout/state.hpp"
#include "talkitout/world.hpp"

namespace talkitout::wire {

inline json error_response(const std::string& code, const std::string& message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

inline json step_response(const Observation& obs, double reward, bool done, const StepInfo& info) {
  return {{"obs", observation_to_json(obs)},
          {"reward", format_decimal(reward)},
          {"done", done},
          {"info", {{"success", info.success}, {"t", info.t}}}};
}

class Session {
 public:
  // One response object per request line.
  json handle(const std::string& line) {
    json req;
    try {
      req = json::parse(line);
    } catch (const json::exception& e) {
      return error_response("parse", e.what());
    }
    if (!req.is_object() || !req.contains("cmd") || !req["cmd"].is_string()) {
      return error_response("parse", "request must be an object with a string \"cmd\"");
    }
    const auto cmd = req["cmd"].get<std::string>();
    try {
      if (cmd == "reset") return handle_reset(req);
      if (cmd == "step") return handle_step(req);
      if (cmd == "close") {
        closed_ = true;
        return {{"closed", true}};
      }
      return error_response("parse", "unknown cmd: " + cmd);
    } catch (const ActionError& e) {
      return error_response("action", e.what());
    } catch (const IllegalTransitionError& e) {
      return error_response("state", e.what());
    } catch (const json::exception& e) {
      return error_response("request", e.what());
    } catch (const Error& e) {
      return error_response("request", e.what());
    }
  }

  std::string handle_line(const std::string& line) { return handle(line).dump(); }

  [[nodiscard]] bool closed() const { return closed_; }
  [[nodiscard]] const std::optional<WorldState>& state() const { return state_; }

 private:
  json handle_reset(const json& req) {
    EnvConfig cfg;
    cfg.variant = parse_variant(req.value("variant", std::string("original")));
    cfg.history_mode = parse_history_mode(req.value("history_mode", std::string("current")));
    const auto seed = req.at("seed").get<std::uint64_t>();
    auto [s, obs] = reset(cfg, seed);
    state_ = std::move(s);
    return step_response(obs, 0.0, false, {false, 0});
  }

  json handle_step(const json& req) {
    if (!state_) throw IllegalTransitionError("step before reset");
    const auto& a = req.at("action");
    if (!a.is_array() || a.size() != 3) throw ActionError("action must be an array of 3 integers");
    std::array<int, 3> triple{};
    for (std::size_t i = 0; i < 3; ++i) {
      if (!a[i].is_number_integer()) throw ActionError("action slots must be integers");
      triple[i] = a[i].get<int>();
    }
    const auto action = Action::from_triple(triple);
    const auto r = step(*state_, action);
    return step_response(r.observation, r.reward, r.done, r.info);
  }

  std::optional<WorldState> state_;
  bool closed_ = false;
};

// Serves requests until EOF or "close".
inline void serve(std::istream& in, std::ostream& out) {
  Session session;
  std::string line;
  while (!session.closed() && std::getline(in, line)) {
    if (line.empty()) continue;
    out << session.handle_line(line) << '\n' << std::flush;
  }
}

}  // namespace talkitout::wire
