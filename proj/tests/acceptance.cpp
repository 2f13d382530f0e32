// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "talkitout/agents.hpp"
#include "talkitout/eval.hpp"
#include "talkitout/explore.hpp"
#include "talkitout/learner/ppo.hpp"
#include "talkitout/learner/train.hpp"
#include "talkitout/npc.hpp"
#include "talkitout/rollout.hpp"
#include "talkitout/serialize.hpp"
#include "talkitout/world.hpp"

using namespace talkitout;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

double formula(int t) { return 1.0 - 0.9 * t / 40.0; }

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

const TestSet& frozen(Variant v) {
  static std::map<Variant, TestSet> sets;
  auto it = sets.find(v);
  if (it == sets.end()) it = sets.emplace(v, TestSet::generate(v, 0)).first;
  return it->second;
}

// ---- criteria

Verdict reward_formula() {
  Verdict v;
  for (int t : {1, 10, 40}) {
    auto [s, obs] = reset({}, 100 + t);
    s.agent_pos = s.front_of(s.doors[s.correct_door]);
    StepResult r;
    for (int k = 1; k < t; ++k) r = step(s, Action{});
    r = step(s, Action{std::nullopt, kOpenSesame});
    v.require(r.done && r.info.success && r.info.t == t, "forced success at t=" + std::to_string(t));
    v.require(std::abs(r.reward - formula(t)) <= 1e-9, "reward at t=" + std::to_string(t));
    v.note("t=" + std::to_string(t) + " r=" + format_decimal(r.reward));
  }
  return v;
}

Verdict random_baseline() {
  Verdict v;
  for (auto variant : {Variant::original, Variant::no_liar}) {
    const auto r = evaluate("random", [] { return make_scripted_agent("random"); }, frozen(variant), {}, workers());
    v.require(r.success_rate < 0.02, std::string(to_string(variant)));
    v.note(std::string(to_string(variant)) + "=" + fmt(r.success_rate, 3));
  }
  return v;
}

Verdict privileged_oracle() {
  Verdict v;
  for (auto variant : {Variant::original, Variant::no_liar}) {
    EnvConfig cfg;
    cfg.variant = variant;
    PrivilegedOracle agent;
    int successes = 0, reward_ok = 0;
    for (const auto seed : frozen(variant).seeds) {
      double final_reward = -1.0;
      int final_t = 0;
      const auto out = run_episode(cfg, seed, agent, [&](const TrajectoryRecord& rec) {
        if (rec.done) {
          final_reward = rec.reward;
          final_t = rec.t;
        }
      });
      successes += out.success;
      reward_ok += out.success && std::abs(final_reward - formula(final_t)) <= 1e-9;
    }
    const double n = static_cast<double>(frozen(variant).seeds.size());
    v.require(successes == static_cast<int>(n), std::string(to_string(variant)) + " success");
    v.require(reward_ok == static_cast<int>(n), std::string(to_string(variant)) + " reward");
    v.note(std::string(to_string(variant)) + "=" + fmt(successes / n, 3));
  }
  return v;
}

// The dialogue the social oracle produces, agent lines included.
std::pair<std::vector<std::string>, bool> social_dialogue(std::uint64_t seed) {
  auto [s, obs] = reset({}, seed);
  SocialOracle oracle;
  oracle.reset(seed);
  std::vector<std::string> lines;
  while (s.status == Status::running) {
    const auto a = oracle.act(obs);
    if (a.speech) lines.push_back("Agent: " + render(*a.speech));
    obs = step(s, a).observation;
    for (const auto& l : obs.heard) lines.push_back(l.serialize());
  }
  return {lines, s.status == Status::success};
}

Verdict social_oracle() {
  Verdict v;
  for (auto variant : {Variant::original, Variant::no_liar}) {
    const auto r = evaluate("oracle-social", [] { return make_scripted_agent("oracle-social"); }, frozen(variant),
                            {}, workers());
    const double need = variant == Variant::original ? 0.90 : 0.95;
    v.require(r.success_rate >= need, std::string(to_string(variant)) + " rate");
    for (const auto& o : r.outcomes) {
      if (!o.success && (!o.timeout || o.invalid_action)) {
        v.require(false, "non-timeout failure on seed " + std::to_string(o.seed));
        break;
      }
    }
    v.note(std::string(to_string(variant)) + "=" + fmt(r.success_rate, 3));
  }
  const std::vector<std::string> expected = {
      "Agent: Where is the exit.", "Wizard: Ask John.",
      "Agent: Where is the exit.", "Jack: Go to the red door.",
      "Agent: Where is the exit.", "John: Go to the blue door.",
      "Agent: Open sesame.",
  };
  std::optional<std::uint64_t> found;
  for (std::uint64_t seed = 0; seed < 20000 && !found; ++seed) {
    const auto [s, obs] = reset({}, seed);
    if (s.true_guide_name() != "John" || s.correct_color() != Color::blue) continue;
    const auto [lines, success] = social_dialogue(seed);
    if (lines == expected && success) found = seed;
  }
  v.require(found.has_value(), "worked-example dialogue");
  if (found) v.note("dialogue seed=" + std::to_string(*found));
  return v;
}

Verdict exploration_bonus() {
  Verdict v;
  const BonusConfig cfg;
  EpisodicLangCounter counter;
  const std::string line = "Wizard: Ask John.";
  const double first = bonus(line, counter, cfg);
  const double repeat = bonus(line, counter, cfg);
  counter.reset();
  const double after_reset = bonus(line, counter, cfg);
  v.require(first == 0.125, "first-hear bonus");
  v.require(repeat < 1e-10, "repeat bonus");
  v.require(after_reset == 0.125, "reset");
  v.note("first=" + format_decimal(first) + " repeat=" + format_decimal(repeat));
  return v;
}

Verdict npc_statistics() {
  Verdict v;
  const std::vector<Door> doors = {
      {{3, 0}, Color::blue}, {{6, 3}, Color::red}, {{2, 6}, Color::green}, {{0, 4}, Color::yellow}};
  Rng rng(77);
  std::map<Color, int> freq;
  constexpr int kAsks = 10000;
  for (int i = 0; i < kAsks; ++i) {
    NpcReplyContext c;
    c.heard = kWhereIsTheExit;
    c.speaker_adjacent = true;
    c.correct_color = Color::blue;
    c.true_guide_name = "John";
    c.doors = doors;
    c.rng = &rng;
    const auto r = false_guide_reply(c, "Jack");
    if (r) ++freq[parse_guide_text(r->text).value_or(Color::blue)];
  }
  v.require(freq.size() == 3 && !freq.count(Color::blue), "liar names only wrong doors");
  for (const auto& [color, n] : freq) {
    v.require(std::abs(n / double(kAsks) - 1.0 / 3.0) <= 0.05, std::string(to_string(color)) + " frequency");
  }

  int pairs = 0, differ = 0;
  bool true_consistent = true;
  for (std::uint64_t seed = 0; seed < 3000; ++seed) {
    auto [s, obs] = reset({}, seed);
    for (std::size_t gi = 1; gi < s.npcs.size(); ++gi) {
      const auto npc = s.npcs[gi];
      for (const auto& d : kNeighbors) {
        if (s.walkable(npc.pos + d)) s.agent_pos = npc.pos + d;
      }
      std::vector<std::string> replies;
      for (int k = 0; k < 2; ++k) {
        for (const auto& l : step(s, {std::nullopt, kWhereIsTheExit}).observation.heard) {
          if (l.speaker == npc.name) replies.push_back(l.text);
        }
      }
      if (replies.size() != 2) {
        v.require(false, "guide did not answer on seed " + std::to_string(seed));
        return v;
      }
      if (npc.kind == NpcKind::true_guide) {
        true_consistent &= replies[0] == replies[1] && replies[0] == guide_text(s.correct_color());
      } else {
        ++pairs;
        differ += replies[0] != replies[1];
      }
    }
  }
  const double p = differ / double(pairs);
  v.require(std::abs(p - 2.0 / 3.0) <= 0.05, "disagreement probability");
  v.require(true_consistent, "true guide consistency");
  std::string freqs;
  for (const auto& [color, n] : freq) freqs += std::string(to_string(color)) + "=" + fmt(n / double(kAsks), 3) + " ";
  v.note(freqs + "disagree=" + fmt(p, 3));
  return v;
}

std::string scripted_log(std::uint64_t script_seed) {
  std::string log;
  Rng script(script_seed);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto [s, obs] = reset({}, seed);
    while (s.status == Status::running) {
      const auto a = random_act(script);
      log += to_json(make_record(seed, a, step(s, a))).dump() + "\n";
    }
  }
  return log;
}

Verdict determinism() {
  Verdict v;
  const auto a = scripted_log(5), b = scripted_log(5);
  v.require(!a.empty() && a == b, "byte-identical trajectory logs");
  const auto ts = TestSet::generate(Variant::original, 3, 300);
  for (const std::string name : {"random", "oracle-social"}) {
    const auto factory = [&] { return make_scripted_agent(name, 9); };
    v.require(evaluate(name, factory, ts, {}, 1) == evaluate(name, factory, ts, {}, 4), name + " serial vs parallel");
  }
  v.note("log bytes=" + std::to_string(a.size()));
  return v;
}

Verdict welch() {
  Verdict v;
  struct Fixture {
    std::vector<double> a, b;
    double p;
  };
  // 50-digit mpmath references.
  const std::vector<Fixture> fixtures = {
      {{0.236, 0.246, 0.226}, {0.996, 0.994, 0.998}, 0.000030768731107876122519},
      {{1.2, 2.3, 3.1, 4.8, 5.0}, {2.2, 3.9, 4.1, 6.0, 7.5, 8.1}, 0.12281463066290737159},
      {{0.5, 0.61, 0.47, 0.52}, {0.55, 0.49, 0.6, 0.58}, 0.46705168081548718869},
      {{10.0, 12.5, 9.8, 11.1, 10.7, 13.2, 9.9}, {14.1, 15.0, 12.2}, 0.053247911018062881389},
  };
  double worst = 0.0;
  for (const auto& f : fixtures) {
    const auto ab = welch_t_test(f.a, f.b), ba = welch_t_test(f.b, f.a);
    worst = std::max(worst, std::abs(ab.p - f.p));
    v.require(ab.t == -ba.t && ab.p == ba.p, "swap symmetry");
  }
  v.require(worst <= 1e-6, "fixture p-values");
  const auto same = welch_t_test({0.1, 0.4, 0.3}, {0.1, 0.4, 0.3});
  v.require(same.t == 0.0 && same.p == 1.0, "identical samples");
  const auto flat = welch_t_test({1.0, 1.0}, {1.0, 1.0});
  v.require(flat.p == 1.0, "zero variance, equal means");
  v.note("max |dp|=" + sci(worst));
  return v;
}

Verdict learner_sanity() {
  using namespace learner;
  Verdict v;
  // GAE against a direct double sum.
  Rng rng(2);
  double gae_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> r(20), val(21);
    bool done[20];
    for (int i = 0; i < 20; ++i) {
      r[i] = 2 * rng.uniform01() - 1;
      done[i] = rng.uniform01() < 0.1;
    }
    for (auto& x : val) x = 2 * rng.uniform01() - 1;
    const auto g = compute_gae(r, val, done, 0.99, 0.99);
    for (int t = 0; t < 20; ++t) {
      double a = 0.0, w = 1.0;
      for (int l = t; l < 20; ++l) {
        a += w * (r[l] + 0.99 * val[l + 1] * (done[l] ? 0.0 : 1.0) - val[l]);
        if (done[l]) break;
        w *= 0.99 * 0.99;
      }
      gae_err = std::max(gae_err, std::abs(a - g.advantages[t]));
    }
  }
  v.require(gae_err <= 1e-10, "GAE brute force");

  // Central differences on a toy policy, every parameter.
  PolicyNet toy(3, 2);
  toy.init(rng);
  toy.params() *= 5.0;
  Eigen::MatrixXd x(3, 10);
  std::vector<HeadAction> acts;
  std::vector<double> old_lp, adv, ret;
  const auto out = toy.forward(x.setRandom()).out;
  for (int j = 0; j < 10; ++j) {
    const HeadDists d(out.col(j));
    acts.push_back(sample_action(d, rng));
    old_lp.push_back(d.joint_log_prob(acts.back()) + 0.3 * (j % 3 - 1));
    adv.push_back(2 * rng.uniform01() - 1);
    ret.push_back(rng.uniform01());
  }
  const PpoConfig pc;
  Eigen::VectorXd grad;
  ppo_loss(toy, x, acts, old_lp, adv, ret, pc, &grad);
  double fd_err = 0.0;
  for (Eigen::Index i = 0; i < toy.param_count(); ++i) {
    const double h = 1e-6, saved = toy.params()[i];
    toy.params()[i] = saved + h;
    const double up = ppo_loss(toy, x, acts, old_lp, adv, ret, pc).loss;
    toy.params()[i] = saved - h;
    const double down = ppo_loss(toy, x, acts, old_lp, adv, ret, pc).loss;
    toy.params()[i] = saved;
    const double fd = (up - down) / (2 * h);
    fd_err = std::max(fd_err, std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-7}));
  }
  v.require(fd_err <= 1e-4, "finite-difference gradient");

  // Door-only training with the default hyperparameters, 500k steps.
  TrainConfig cfg;
  cfg.env.variant = Variant::door_only;
  cfg.total_steps = 500000;
  cfg.workers = workers();
  Trainer trainer(cfg);
  const auto result = trainer.run();
  v.require(!result.halted, "training halted: " + result.diagnostic);
  auto net = std::make_shared<const PolicyNet>(trainer.net());
  EnvConfig env;
  env.variant = Variant::door_only;
  const auto report = evaluate("policy", [&] { return std::make_unique<PolicyAgent>(net, true); },
                               frozen(Variant::door_only), env, workers());
  v.require(report.success_rate >= 0.8, "door-only success");
  v.require(result.steps <= 500000, "step budget");
  v.note("gae err=" + sci(gae_err) + " fd rel err=" + sci(fd_err) + " door-only greedy=" +
         fmt(report.success_rate, 3) + " after " + std::to_string(result.steps) + " steps");
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"reward formula", reward_formula},
      {"random baseline", random_baseline},
      {"privileged oracle", privileged_oracle},
      {"social oracle", social_oracle},
      {"exploration bonus", exploration_bonus},
      {"npc statistics", npc_statistics},
      {"determinism", determinism},
      {"welch t-test", welch},
      {"learner sanity", learner_sanity},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s (%.1fs): %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), secs, v.detail.c_str());
    std::fflush(stdout);
    failures += !v.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
