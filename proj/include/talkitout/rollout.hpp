#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "talkitout/agents.hpp"
#include "talkitout/errors.hpp"
#include "talkitout/serialize.hpp"
#include "talkitout/state.hpp"
#include "talkitout/world.hpp"

namespace talkitout {

struct EpisodeOutcome {
  std::uint64_t seed = 0;
  bool success = false;
  bool timeout = false;
  bool invalid_action = false;
  double reward = 0.0;
  int steps = 0;
  std::string diagnostic;

  bool operator==(const EpisodeOutcome&) const = default;
};

using RecordSink = std::function<void(const TrajectoryRecord&)>;

// Plays one episode to termination. Agent errors end the episode as a
// failure with a diagnostic instead of propagating.
inline EpisodeOutcome run_episode(const EnvConfig& config, std::uint64_t seed, Agent& agent,
                                  const RecordSink& sink = {}) {
  auto [state, obs] = reset(config, seed);
  agent.reset(seed);
  EpisodeOutcome out;
  out.seed = seed;
  while (state.status == Status::running) {
    Action a;
    try {
      if (agent.needs_state()) agent.observe_state(state);
      a = agent.act(obs);
      if (a.speech && !valid(*a.speech)) throw ActionError("speech slot out of range");
    } catch (const Error& e) {
      out.invalid_action = true;
      out.diagnostic = e.what();
      out.steps = state.t;
      return out;
    }
    const auto r = step(state, a);
    if (sink) sink(make_record(seed, a, r));
    out.reward += r.reward;
    obs = r.observation;
  }
  out.success = state.status == Status::success;
  out.timeout = !out.success && state.t >= config.t_max;
  out.steps = state.t;
  return out;
}

// Applies `fn` to indices [0, n) on `workers` threads; results are stored by
// index, so the output does not depend on the worker count.
template <typename Fn>
auto parallel_map(std::size_t n, unsigned workers, Fn&& fn) {
  using R = decltype(fn(std::size_t{}, 0u));
  std::vector<R> results(n);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) results[i] = fn(i, 0u);
    return results;
  }
  std::vector<std::thread> threads;
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) results[i] = fn(i, w);
    });
  }
  for (auto& t : threads) t.join();
  return results;
}

}  // namespace talkitout
