#pragma once

// Fixed test-set evaluation and run statistics.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "talkitout/agents.hpp"
#include "talkitout/errors.hpp"
#include "talkitout/rng.hpp"
#include "talkitout/rollout.hpp"
#include "talkitout/serialize.hpp"
#include "talkitout/state.hpp"

namespace talkitout {

inline constexpr std::size_t kTestSetSize = 1000;

struct TestSet {
  Variant variant = Variant::original;
  std::vector<std::uint64_t> seeds;

  bool operator==(const TestSet&) const = default;

  // Distinct 32-bit seeds, one stream per variant.
  static TestSet generate(Variant v, std::uint64_t master_seed, std::size_t n = kTestSetSize) {
    Rng rng(master_seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(v) + 1);
    TestSet ts{v, {}};
    std::set<std::uint64_t> seen;
    while (ts.seeds.size() < n) {
      const auto s = rng.next_u64() >> 32;
      if (seen.insert(s).second) ts.seeds.push_back(s);
    }
    return ts;
  }

  [[nodiscard]] std::string dump() const {
    json j{{"variant", std::string(to_string(variant))}, {"seeds", seeds}};
    return j.dump() + "\n";
  }

  static TestSet parse(const std::string& text) {
    try {
      const auto j = json::parse(text);
      return {parse_variant(j.at("variant").get<std::string>()),
              j.at("seeds").get<std::vector<std::uint64_t>>()};
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed test set: ") + e.what());
    }
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << dump();
  }

  static TestSet load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }
};

struct EvalReport {
  std::string agent;
  Variant variant = Variant::original;
  double success_rate = 0.0;
  double mean_reward = 0.0;
  double timeout_rate = 0.0;
  double invalid_rate = 0.0;
  std::vector<EpisodeOutcome> outcomes;

  bool operator==(const EvalReport&) const = default;
};

using AgentFactory = std::function<std::unique_ptr<Agent>()>;

inline EvalReport summarize(std::string agent, Variant variant, std::vector<EpisodeOutcome> outcomes) {
  EvalReport r;
  r.agent = std::move(agent);
  r.variant = variant;
  r.outcomes = std::move(outcomes);
  if (r.outcomes.empty()) return r;
  double successes = 0, reward = 0, timeouts = 0, invalid = 0;
  for (const auto& o : r.outcomes) {
    successes += o.success;
    reward += o.reward;
    timeouts += o.timeout;
    invalid += o.invalid_action;
  }
  const double n = static_cast<double>(r.outcomes.size());
  r.success_rate = successes / n;
  r.mean_reward = reward / n;
  r.timeout_rate = timeouts / n;
  r.invalid_rate = invalid / n;
  return r;
}

// One episode per seed; each worker owns its agent instance.
inline EvalReport evaluate(const std::string& agent_name, const AgentFactory& factory,
                           const TestSet& ts, EnvConfig config = {}, unsigned workers = 1) {
  config.variant = ts.variant;
  std::vector<std::unique_ptr<Agent>> agents;
  const unsigned w = std::max(1u, workers);
  for (unsigned i = 0; i < w; ++i) agents.push_back(factory());
  auto outcomes = parallel_map(ts.seeds.size(), w, [&](std::size_t i, unsigned worker) {
    return run_episode(config, ts.seeds[i], *agents[worker]);
  });
  return summarize(agent_name, ts.variant, std::move(outcomes));
}

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
  double p = 1.0;
};

namespace detail {

inline std::pair<double, double> mean_var(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, ss / (n - 1.0)};
}

}  // namespace detail

// Two-sided survival of Student's t: I_{dof/(dof+t^2)}(dof/2, 1/2).
inline double student_t_two_sided_p(double t, double dof) {
  if (!std::isfinite(t)) return 0.0;
  const double x = dof / (dof + t * t);
  return boost::math::ibeta(dof / 2.0, 0.5, x);
}

inline WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw DomainError("Welch's t-test needs at least 2 samples per group");
  const auto [ma, va] = detail::mean_var(a);
  const auto [mb, vb] = detail::mean_var(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double sa = va / na;
  const double sb = vb / nb;
  const double se2 = sa + sb;
  WelchResult r;
  if (se2 == 0.0) {
    r.dof = na + nb - 2.0;
    if (ma == mb) return r;
    r.t = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.dof = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p = student_t_two_sided_p(r.t, r.dof);
  return r;
}

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

// Sample mean and sample standard deviation of success rates.
inline MeanStd aggregate_runs(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw DomainError("aggregate_runs: no reports");
  if (reports.size() < 2) throw DomainError("aggregate_runs: need at least 2 reports");
  std::vector<double> rates;
  for (const auto& r : reports) rates.push_back(r.success_rate);
  const auto [m, v] = detail::mean_var(rates);
  return {m, std::sqrt(v)};
}

inline json report_to_json(const EvalReport& r, bool with_outcomes = false) {
  json j{{"agent", r.agent},
         {"variant", std::string(to_string(r.variant))},
         {"episodes", r.outcomes.size()},
         {"success_rate", r.success_rate},
         {"mean_reward", r.mean_reward},
         {"timeout_rate", r.timeout_rate},
         {"invalid_rate", r.invalid_rate}};
  if (with_outcomes) {
    json per = json::array();
    for (const auto& o : r.outcomes) {
      per.push_back({{"seed", o.seed},
                     {"success", o.success},
                     {"timeout", o.timeout},
                     {"steps", o.steps},
                     {"reward", format_decimal(o.reward)}});
    }
    j["outcomes"] = std::move(per);
  }
  return j;
}

// Conditions as rows, variants as columns.
inline std::string report_table(const std::vector<EvalReport>& reports) {
  std::vector<std::string> agents;
  std::vector<Variant> variants;
  for (const auto& r : reports) {
    if (std::find(agents.begin(), agents.end(), r.agent) == agents.end()) agents.push_back(r.agent);
    if (std::find(variants.begin(), variants.end(), r.variant) == variants.end()) variants.push_back(r.variant);
  }
  std::size_t w0 = std::string("Condition").size();
  for (const auto& a : agents) w0 = std::max(w0, a.size());
  constexpr int kCol = 12;
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(w0)) << "Condition";
  for (auto v : variants) out << "  " << std::right << std::setw(kCol) << to_string(v);
  out << '\n';
  for (const auto& a : agents) {
    out << std::left << std::setw(static_cast<int>(w0)) << a;
    for (auto v : variants) {
      std::string cell = "-";
      for (const auto& r : reports) {
        if (r.agent == a && r.variant == v) {
          std::ostringstream c;
          c << std::fixed << std::setprecision(3) << r.success_rate;
          cell = c.str();
        }
      }
      out << "  " << std::right << std::setw(kCol) << cell;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace talkitout
