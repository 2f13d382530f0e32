#pragma once

// Generalized advantage estimation, the clipped-surrogate loss with its
// analytic gradient, and an Adam optimizer over the flat parameter vector.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "talkitout/errors.hpp"
#include "talkitout/learner/policy.hpp"
#include "talkitout/rng.hpp"

namespace talkitout::learner {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// `values` has one more entry than `rewards`: the bootstrap value of the
// state after the last transition. done_t cuts both bootstrap and trace.
inline GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                             std::span<const bool> dones, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n + 1 || dones.size() != n) throw ShapeError("compute_gae: misaligned trajectory arrays");
  GaeResult r;
  r.advantages.assign(n, 0.0);
  r.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double live = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * values[i + 1] * live - values[i];
    running = delta + gamma * lambda * live * running;
    r.advantages[i] = running;
    r.returns[i] = running + values[i];
  }
  return r;
}

struct PpoConfig {
  double clip_epsilon = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
};

struct LossStats {
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

// Columns of `x` are samples. Loss per sample:
//   -min(rho A, clip(rho, 1-eps, 1+eps) A) + c_v (V - R)^2 - c_e H
// averaged over the batch. If `grad` is given it receives d(loss)/d(params).
inline LossStats ppo_loss(const PolicyNet& net, const Eigen::Ref<const Eigen::MatrixXd>& x,
                          std::span<const HeadAction> actions, std::span<const double> old_log_prob,
                          std::span<const double> advantages, std::span<const double> returns,
                          const PpoConfig& cfg, Eigen::VectorXd* grad = nullptr) {
  const auto n = static_cast<std::size_t>(x.cols());
  if (actions.size() != n || old_log_prob.size() != n || advantages.size() != n || returns.size() != n) {
    throw ShapeError("ppo_loss: batch arrays disagree in length");
  }
  const auto act = net.forward(x);
  Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(kOutputSize, static_cast<Eigen::Index>(n));
  LossStats s;
  const double inv_n = 1.0 / static_cast<double>(n);

  for (std::size_t i = 0; i < n; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    const HeadDists d(act.out.col(col));
    const HeadAction& a = actions[i];
    const double logp = d.joint_log_prob(a);
    const double rho = std::exp(logp - old_log_prob[i]);
    const double adv = advantages[i];
    const double clipped = std::clamp(rho, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
    const bool use_clipped = clipped * adv < rho * adv;
    const double surrogate = use_clipped ? clipped * adv : rho * adv;
    if (clipped != rho) s.clip_fraction += inv_n;

    const double v_err = d.value - returns[i];
    const double h = d.entropy();
    s.policy_loss -= surrogate * inv_n;
    s.value_loss += v_err * v_err * inv_n;
    s.entropy += h * inv_n;

    if (!grad) continue;
    auto g = d_out.col(col);
    // d(-surrogate)/d(logp): -rho A on the unclipped branch, 0 when saturated.
    const double g_logp = use_clipped ? 0.0 : -rho * adv * inv_n;
    const double p = d.p_speak();
    const auto softmax_grad = [](const Eigen::VectorXd& logp_head, int chosen) {
      Eigen::VectorXd v = -logp_head.array().exp().matrix();
      v[chosen] += 1.0;
      return v;
    };
    const auto entropy_grad = [](const Eigen::VectorXd& logp_head) {
      const double hh = categorical_entropy(logp_head);
      return Eigen::VectorXd(-(logp_head.array().exp() * (logp_head.array() + hh)));
    };

    g.segment(kMoveOff, kMoveDim) += g_logp * softmax_grad(d.move_logp, a.move);
    g[kSwitchOff] += g_logp * (a.speak ? 1.0 - p : -p);
    if (a.speak) {
      g.segment(kTemplateOff, kTemplateDim) += g_logp * softmax_grad(d.tmpl_logp, a.tmpl);
      g.segment(kWordOff, kWordDim) += g_logp * softmax_grad(d.word_logp, a.word);
    }

    // Entropy term, H = H(move) + Hb(p) + p (H(tmpl) + H(word)).
    const double ce = -cfg.entropy_coef * inv_n;
    const double h_tw = categorical_entropy(d.tmpl_logp) + categorical_entropy(d.word_logp);
    g.segment(kMoveOff, kMoveDim) += ce * entropy_grad(d.move_logp);
    g[kSwitchOff] += ce * p * (1.0 - p) * (h_tw - d.switch_logit);
    g.segment(kTemplateOff, kTemplateDim) += ce * p * entropy_grad(d.tmpl_logp);
    g.segment(kWordOff, kWordDim) += ce * p * entropy_grad(d.word_logp);

    g[kValueOff] += cfg.value_coef * 2.0 * v_err * inv_n;
  }
  s.loss = s.policy_loss + cfg.value_coef * s.value_loss - cfg.entropy_coef * s.entropy;
  if (grad) {
    grad->setZero(net.param_count());
    net.backward(x, act, d_out, *grad);
  }
  return s;
}

class Adam {
 public:
  Adam(Eigen::Index n, double lr, double eps, double beta1 = 0.9, double beta2 = 0.999)
      : lr_(lr), eps_(eps), b1_(beta1), b2_(beta2), m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)) {}

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    ++t_;
    m_ = b1_ * m_ + (1.0 - b1_) * grad;
    v_ = b2_ * v_ + (1.0 - b2_) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
  }

  [[nodiscard]] long steps() const { return t_; }

 private:
  double lr_, eps_, b1_, b2_;
  Eigen::VectorXd m_, v_;
  long t_ = 0;
};

struct UpdateConfig {
  PpoConfig ppo;
  int epochs = 4;
  int minibatches = 4;
  double max_grad_norm = 0.5;  // <= 0 disables clipping
  bool normalize_advantages = true;
};

struct UpdateStats {
  LossStats last;
  bool aborted = false;
};

// Several epochs of shuffled minibatch steps over one batch. A non-finite
// loss or gradient restores the parameters from before the update.
inline UpdateStats clipped_update(PolicyNet& net, Adam& opt, const Eigen::MatrixXd& x,
                                  std::span<const HeadAction> actions, std::span<const double> old_log_prob,
                                  std::vector<double> advantages, std::span<const double> returns,
                                  const UpdateConfig& cfg, Rng& rng) {
  const std::size_t n = actions.size();
  if (n == 0) return {};
  if (cfg.normalize_advantages && n > 1) {
    const double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double a : advantages) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (double& a : advantages) a = (a - mean) / (sd + 1e-8);
  }
  const Eigen::VectorXd backup = net.params();
  UpdateStats out;
  std::vector<std::size_t> order(n);
  const std::size_t mb_count = std::max<std::size_t>(1, std::min<std::size_t>(n, static_cast<std::size_t>(cfg.minibatches)));
  Eigen::VectorXd grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.partial_shuffle(std::span<std::size_t>(order), n);
    for (std::size_t mb = 0; mb < mb_count; ++mb) {
      const std::size_t lo = mb * n / mb_count, hi = (mb + 1) * n / mb_count;
      const std::size_t m = hi - lo;
      Eigen::MatrixXd xm(x.rows(), static_cast<Eigen::Index>(m));
      std::vector<HeadAction> am(m);
      std::vector<double> lm(m), advm(m), rm(m);
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t j = order[lo + k];
        xm.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(j));
        am[k] = actions[j];
        lm[k] = old_log_prob[j];
        advm[k] = advantages[j];
        rm[k] = returns[j];
      }
      out.last = ppo_loss(net, xm, am, lm, advm, rm, cfg.ppo, &grad);
      if (!std::isfinite(out.last.loss) || !grad.allFinite()) {
        net.params() = backup;
        out.aborted = true;
        return out;
      }
      if (cfg.max_grad_norm > 0) {
        const double norm = grad.norm();
        if (norm > cfg.max_grad_norm) grad *= cfg.max_grad_norm / norm;
      }
      opt.step(net.params(), grad);
    }
  }
  if (!net.finite()) {
    net.params() = backup;
    out.aborted = true;
  }
  return out;
}

}  // namespace talkitout::learner
