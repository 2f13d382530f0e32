#pragma once

// Rollout collection over parallel environments and the training loop.
// Env k of a batch owns its own random stream (episode seeds and action
// sampling), so collected batches do not depend on the worker count.

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "talkitout/agents.hpp"
#include "talkitout/explore.hpp"
#include "talkitout/learner/features.hpp"
#include "talkitout/learner/policy.hpp"
#include "talkitout/learner/ppo.hpp"
#include "talkitout/rollout.hpp"
#include "talkitout/serialize.hpp"
#include "talkitout/world.hpp"

namespace talkitout::learner {

struct TrainConfig {
  double learning_rate = 1e-4;
  double gae_lambda = 0.99;
  double clip_epsilon = 0.2;
  double optimizer_epsilon = 1e-5;
  int batch_size = 1280;
  double gamma = 0.99;
  int epochs = 4;
  int minibatches = 4;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double max_grad_norm = 0.5;
  int hidden = 128;
  int num_envs = 16;
  long total_steps = 500000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  EnvConfig env;
  std::optional<BonusConfig> bonus;
};

inline void validate(const TrainConfig& c) {
  const bool ok = c.learning_rate > 0 && c.gae_lambda > 0 && c.clip_epsilon > 0 && c.optimizer_epsilon > 0 &&
                  c.batch_size > 0 && c.gamma > 0 && c.epochs > 0 && c.minibatches > 0 && c.value_coef >= 0 &&
                  c.entropy_coef >= 0 && c.hidden > 0 && c.num_envs > 0 && c.total_steps >= c.batch_size &&
                  c.batch_size % c.num_envs == 0;
  if (!ok) throw DomainError("invalid training configuration");
  if (c.bonus) validate(*c.bonus);
}

// One row of the learning curve; returns are means over episodes that
// finished inside the batch.
struct CurvePoint {
  long step = 0;
  double success_rate = 0.0;
  double extrinsic_return = 0.0;
  double intrinsic_return = 0.0;
  int episodes = 0;

  bool operator==(const CurvePoint&) const = default;
};

inline void write_curve_header(std::ostream& out) { out << "step,success_rate,extrinsic_return,intrinsic_return\n"; }

inline void write_curve_row(std::ostream& out, const CurvePoint& p) {
  out << p.step << ',' << format_decimal(p.success_rate) << ',' << format_decimal(p.extrinsic_return) << ','
      << format_decimal(p.intrinsic_return) << '\n';
}

// Lines heard this step, as the bonus counter keys them.
inline std::vector<std::string> heard_keys(const Observation& obs) {
  std::vector<std::string> keys;
  keys.reserve(obs.heard.size());
  for (const auto& l : obs.heard) keys.push_back(l.serialize());
  return keys;
}

// A single environment driven by the learner.
class EnvSlot {
 public:
  EnvSlot(EnvConfig config, std::uint64_t stream_seed) : config_(config), rng_(stream_seed) { begin_episode(); }

  struct Transition {
    HeadAction action;
    double log_prob = 0.0;
    double value = 0.0;
    double extrinsic = 0.0;
    double intrinsic = 0.0;
    bool done = false;
  };

  struct Episode {
    bool success = false;
    double extrinsic = 0.0;
    double intrinsic = 0.0;
  };

  void features(Eigen::Ref<Eigen::VectorXd> out) const { encode_features(obs_.image, bag_, out); }

  // Samples from the policy and advances; finished episodes restart.
  Transition advance(const PolicyNet& net, const std::optional<BonusConfig>& bonus, Eigen::VectorXd& x,
                     std::vector<Episode>& finished) {
    features(x);
    const auto a = net.forward(x);
    const HeadDists d(a.out.col(0));
    Transition tr;
    tr.action = sample_action(d, rng_);
    tr.log_prob = d.joint_log_prob(tr.action);
    tr.value = d.value;
    const auto r = step(state_, tr.action.to_action());
    tr.extrinsic = r.reward;
    if (bonus) {
      const auto keys = heard_keys(r.observation);
      tr.intrinsic = intrinsic_reward(keys, counter_, *bonus);
    }
    tr.done = r.done;
    ep_.extrinsic += tr.extrinsic;
    ep_.intrinsic += tr.intrinsic;
    obs_ = r.observation;
    for (const auto& l : obs_.heard) bag_.add(l);
    if (r.done) {
      ep_.success = r.info.success;
      finished.push_back(ep_);
      begin_episode();
    }
    return tr;
  }

 private:
  void begin_episode() {
    auto [s, o] = reset(config_, rng_.next_u64() >> 32);
    state_ = std::move(s);
    obs_ = std::move(o);
    bag_.reset();
    for (const auto& l : obs_.heard) bag_.add(l);
    counter_.reset();
    ep_ = {};
  }

  EnvConfig config_;
  Rng rng_;
  WorldState state_;
  Observation obs_;
  LanguageBag bag_;
  EpisodicLangCounter counter_;
  Episode ep_;
};

struct TrainResult {
  std::vector<CurvePoint> curve;
  bool halted = false;
  std::string diagnostic;
  long steps = 0;
};

// Called after every batch; returning false stops training early.
using BatchCallback = std::function<bool(const CurvePoint&, const PolicyNet&)>;

class Trainer {
 public:
  explicit Trainer(TrainConfig cfg)
      : cfg_(std::move(cfg)),
        net_(kInputSize, cfg_.hidden),
        opt_(net_.param_count(), cfg_.learning_rate, cfg_.optimizer_epsilon),
        rng_(cfg_.seed) {
    validate(cfg_);
    Rng init = rng_.split();
    net_.init(init);
    for (int k = 0; k < cfg_.num_envs; ++k) envs_.emplace_back(cfg_.env, rng_.next_u64());
  }

  [[nodiscard]] const PolicyNet& net() const { return net_; }
  PolicyNet& net() { return net_; }
  [[nodiscard]] const TrainConfig& config() const { return cfg_; }

  // Collects one batch and runs the clipped update on it.
  CurvePoint train_batch(UpdateStats* stats = nullptr) {
    const int per_env = cfg_.batch_size / cfg_.num_envs;
    struct Chunk {
      Eigen::MatrixXd x;
      std::vector<EnvSlot::Transition> tr;
      double bootstrap = 0.0;
      std::vector<EnvSlot::Episode> finished;
    };
    auto chunks = parallel_map(envs_.size(), cfg_.workers, [&](std::size_t k, unsigned) {
      Chunk c;
      c.x.resize(kInputSize, per_env);
      Eigen::VectorXd x(kInputSize);
      for (int t = 0; t < per_env; ++t) {
        c.tr.push_back(envs_[k].advance(net_, cfg_.bonus, x, c.finished));
        c.x.col(t) = x;
      }
      envs_[k].features(x);
      c.bootstrap = net_.forward(x).out(kValueOff, 0);
      return c;
    });

    const auto n = static_cast<std::size_t>(cfg_.batch_size);
    Eigen::MatrixXd x(kInputSize, static_cast<Eigen::Index>(n));
    std::vector<HeadAction> actions;
    std::vector<double> logp, adv, ret;
    CurvePoint point;
    for (std::size_t k = 0; k < chunks.size(); ++k) {
      const auto& c = chunks[k];
      x.middleCols(static_cast<Eigen::Index>(k) * per_env, per_env) = c.x;
      std::vector<double> rewards, values;
      std::vector<bool> dones_v;
      for (const auto& t : c.tr) {
        actions.push_back(t.action);
        logp.push_back(t.log_prob);
        rewards.push_back(t.extrinsic + t.intrinsic);
        values.push_back(t.value);
        dones_v.push_back(t.done);
      }
      values.push_back(c.bootstrap);
      const std::unique_ptr<bool[]> dones(new bool[dones_v.size()]);
      for (std::size_t i = 0; i < dones_v.size(); ++i) dones[i] = dones_v[i];
      const auto g = compute_gae(rewards, values, std::span<const bool>(dones.get(), dones_v.size()), cfg_.gamma,
                                 cfg_.gae_lambda);
      adv.insert(adv.end(), g.advantages.begin(), g.advantages.end());
      ret.insert(ret.end(), g.returns.begin(), g.returns.end());
      for (const auto& e : c.finished) {
        ++point.episodes;
        point.success_rate += e.success;
        point.extrinsic_return += e.extrinsic;
        point.intrinsic_return += e.intrinsic;
      }
    }
    if (point.episodes > 0) {
      point.success_rate /= point.episodes;
      point.extrinsic_return /= point.episodes;
      point.intrinsic_return /= point.episodes;
    }

    UpdateConfig ucfg;
    ucfg.ppo = {cfg_.clip_epsilon, cfg_.value_coef, cfg_.entropy_coef};
    ucfg.epochs = cfg_.epochs;
    ucfg.minibatches = cfg_.minibatches;
    ucfg.max_grad_norm = cfg_.max_grad_norm;
    const auto st = clipped_update(net_, opt_, x, actions, logp, std::move(adv), ret, ucfg, rng_);
    if (stats) *stats = st;
    if (st.aborted) throw DomainError("non-finite loss or parameters; update aborted");
    steps_ += cfg_.batch_size;
    point.step = steps_;
    return point;
  }

  // Only whole batches are run, so the step count never exceeds the budget.
  TrainResult run(const BatchCallback& on_batch = {}) {
    TrainResult result;
    while (steps_ + cfg_.batch_size <= cfg_.total_steps) {
      CurvePoint p;
      try {
        p = train_batch();
      } catch (const DomainError& e) {
        result.halted = true;
        result.diagnostic = std::string(e.what()) + " at step " + std::to_string(steps_);
        break;
      }
      result.curve.push_back(p);
      if (on_batch && !on_batch(p, net_)) break;
    }
    result.steps = steps_;
    return result;
  }

 private:
  TrainConfig cfg_;
  PolicyNet net_;
  Adam opt_;
  Rng rng_;
  std::vector<EnvSlot> envs_;
  long steps_ = 0;
};

// Evaluation wrapper around a trained network.
class PolicyAgent final : public Agent {
 public:
  explicit PolicyAgent(std::shared_ptr<const PolicyNet> net, bool greedy = true, std::uint64_t seed = 0)
      : net_(std::move(net)), greedy_(greedy), rng_(seed), x_(kInputSize) {}

  void reset(std::uint64_t episode_seed) override {
    bag_.reset();
    rng_ = Rng(episode_seed ^ 0x5bd1e995ULL);
  }

  Action act(const Observation& obs) override {
    for (const auto& l : obs.heard) bag_.add(l);
    encode_features(obs.image, bag_, x_);
    const auto a = net_->forward(x_);
    const HeadDists d(a.out.col(0));
    return (greedy_ ? greedy_action(d) : sample_action(d, rng_)).to_action();
  }

 private:
  std::shared_ptr<const PolicyNet> net_;
  bool greedy_;
  Rng rng_;
  LanguageBag bag_;
  Eigen::VectorXd x_;
};

}  // namespace talkitout::learner
