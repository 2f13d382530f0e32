#pragma once

// JSON forms shared by the trajectory log and the wire protocol.

#include <charconv>
#include <cstdint>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "talkitout/errors.hpp"
#include "talkitout/state.hpp"

namespace talkitout {

using json = nlohmann::json;

// Shortest decimal that parses back to the same double.
inline std::string format_decimal(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) throw Error("could not format decimal");
  return {buf, res.ptr};
}

inline double parse_decimal(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ParseError("not a decimal: " + s);
  }
  return v;
}

inline json view_to_json(const View& v) {
  json rows = json::array();
  for (const auto& row : v) {
    json r = json::array();
    for (const auto& c : row) r.push_back({c.type, c.color, c.extra});
    rows.push_back(std::move(r));
  }
  return rows;
}

inline json heard_to_json(const std::vector<HeardLine>& lines) {
  json out = json::array();
  for (const auto& l : lines) out.push_back(l.serialize());
  return out;
}

inline json observation_to_json(const Observation& obs) {
  return {{"image", view_to_json(obs.image)},
          {"heard", heard_to_json(obs.heard)},
          {"heard_text", obs.heard_text}};
}

// One JSONL record of an episode trajectory.
struct TrajectoryRecord {
  std::uint64_t episode_seed = 0;
  int t = 0;
  Action action;
  std::vector<HeardLine> heard;
  double reward = 0.0;
  bool done = false;
  bool success = false;
};

inline json to_json(const TrajectoryRecord& r) {
  const auto a = r.action.to_triple();
  json j;
  j["episode_seed"] = r.episode_seed;
  j["t"] = r.t;
  j["action"] = {a[0], a[1], a[2]};
  j["heard"] = heard_to_json(r.heard);
  j["reward"] = format_decimal(r.reward);
  j["done"] = r.done;
  j["success"] = r.success;
  return j;
}

inline TrajectoryRecord make_record(std::uint64_t seed, const Action& a, const StepResult& r) {
  return {seed, r.info.t, a, r.observation.heard, r.reward, r.done, r.info.success};
}

}  // namespace talkitout
