#pragma once

// Feedforward multi-head policy: two tanh layers feeding a linear output
// block split into move (8 = 7 primitives + no-op), speak switch (1),
// template (4), word (16) and value (1).

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "talkitout/errors.hpp"
#include "talkitout/grammar.hpp"
#include "talkitout/rng.hpp"
#include "talkitout/state.hpp"

namespace talkitout::learner {

inline constexpr int kMoveDim = 8;
inline constexpr int kNoOpMove = 7;
inline constexpr int kSwitchDim = 1;
inline constexpr int kTemplateDim = kNumTemplates;
inline constexpr int kWordDim = kNumNouns;

inline constexpr int kMoveOff = 0;
inline constexpr int kSwitchOff = kMoveOff + kMoveDim;
inline constexpr int kTemplateOff = kSwitchOff + kSwitchDim;
inline constexpr int kWordOff = kTemplateOff + kTemplateDim;
inline constexpr int kValueOff = kWordOff + kWordDim;
inline constexpr int kOutputSize = kValueOff + 1;

// Action in head coordinates.
struct HeadAction {
  int move = kNoOpMove;
  bool speak = false;
  int tmpl = 0;
  int word = 0;

  bool operator==(const HeadAction&) const = default;

  [[nodiscard]] Action to_action() const {
    Action a;
    if (move != kNoOpMove) a.primitive = static_cast<Primitive>(move);
    if (speak) a.speech = Utterance{tmpl, word};
    return a;
  }

  static HeadAction from_action(const Action& a) {
    HeadAction h;
    h.move = a.primitive ? static_cast<int>(*a.primitive) : kNoOpMove;
    h.speak = a.speech.has_value();
    if (a.speech) {
      h.tmpl = a.speech->template_index;
      h.word = a.speech->noun_index;
    }
    return h;
  }
};

inline Eigen::VectorXd log_softmax(const Eigen::Ref<const Eigen::VectorXd>& z) {
  const double m = z.maxCoeff();
  const double lse = m + std::log((z.array() - m).exp().sum());
  return (z.array() - lse).matrix();
}

inline double categorical_entropy(const Eigen::Ref<const Eigen::VectorXd>& logp) {
  return -(logp.array().exp() * logp.array()).sum();
}

// log sigmoid(z) and log(1 - sigmoid(z)), stable for large |z|.
inline double log_sigmoid(double z) { return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }
inline double log_one_minus_sigmoid(double z) { return log_sigmoid(-z); }
inline double sigmoid(double z) { return std::exp(log_sigmoid(z)); }

// Per-sample head distributions derived from one output column.
struct HeadDists {
  Eigen::VectorXd move_logp;
  double switch_logit = 0.0;
  Eigen::VectorXd tmpl_logp;
  Eigen::VectorXd word_logp;
  double value = 0.0;

  explicit HeadDists(const Eigen::Ref<const Eigen::VectorXd>& out)
      : move_logp(log_softmax(out.segment(kMoveOff, kMoveDim))),
        switch_logit(out[kSwitchOff]),
        tmpl_logp(log_softmax(out.segment(kTemplateOff, kTemplateDim))),
        word_logp(log_softmax(out.segment(kWordOff, kWordDim))),
        value(out[kValueOff]) {}

  [[nodiscard]] double p_speak() const { return sigmoid(switch_logit); }

  // log p(move) + log p(switch) [+ log p(template) + log p(word) when speaking].
  // -inf when the action has zero probability.
  [[nodiscard]] double joint_log_prob(const HeadAction& a) const {
    double lp = move_logp[a.move];
    lp += a.speak ? log_sigmoid(switch_logit) : log_one_minus_sigmoid(switch_logit);
    if (a.speak) lp += tmpl_logp[a.tmpl] + word_logp[a.word];
    return std::exp(lp) > 0.0 ? lp : -std::numeric_limits<double>::infinity();
  }

  // Exact joint entropy: H(move) + H(switch) + p(speak) (H(template) + H(word)).
  [[nodiscard]] double entropy() const {
    const double p = p_speak();
    const double h_switch = -(p > 0 ? p * log_sigmoid(switch_logit) : 0.0) -
                            (p < 1 ? (1 - p) * log_one_minus_sigmoid(switch_logit) : 0.0);
    return categorical_entropy(move_logp) + h_switch +
           p * (categorical_entropy(tmpl_logp) + categorical_entropy(word_logp));
  }
};

inline int sample_categorical(const Eigen::VectorXd& logp, Rng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (int i = 0; i < logp.size(); ++i) {
    acc += std::exp(logp[i]);
    if (u < acc) return i;
  }
  return static_cast<int>(logp.size()) - 1;
}

inline HeadAction sample_action(const HeadDists& d, Rng& rng) {
  HeadAction a;
  a.move = sample_categorical(d.move_logp, rng);
  a.speak = rng.uniform01() < d.p_speak();
  a.tmpl = sample_categorical(d.tmpl_logp, rng);
  a.word = sample_categorical(d.word_logp, rng);
  return a;
}

// Mode of each head; speaks when the switch output exceeds 0.5.
inline HeadAction greedy_action(const HeadDists& d) {
  HeadAction a;
  d.move_logp.maxCoeff(&a.move);
  a.speak = d.p_speak() > 0.5;
  d.tmpl_logp.maxCoeff(&a.tmpl);
  d.word_logp.maxCoeff(&a.word);
  return a;
}

// All parameters live in one flat vector; the layer matrices are views.
class PolicyNet {
 public:
  PolicyNet(int input_size, int hidden_size) : in_(input_size), hidden_(hidden_size) {
    params_.setZero(param_count());
  }

  [[nodiscard]] int input_size() const { return in_; }
  [[nodiscard]] int hidden_size() const { return hidden_; }
  [[nodiscard]] Eigen::Index param_count() const {
    return static_cast<Eigen::Index>(hidden_) * in_ + hidden_ + static_cast<Eigen::Index>(hidden_) * hidden_ +
           hidden_ + static_cast<Eigen::Index>(kOutputSize) * hidden_ + kOutputSize;
  }

  Eigen::VectorXd& params() { return params_; }
  [[nodiscard]] const Eigen::VectorXd& params() const { return params_; }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases; output
  // rows scaled down so the initial heads are close to uniform.
  void init(Rng& rng) {
    auto fill = [&](auto block, int fan_in, double scale) {
      const double bound = scale / std::sqrt(static_cast<double>(fan_in));
      for (Eigen::Index j = 0; j < block.cols(); ++j) {
        for (Eigen::Index i = 0; i < block.rows(); ++i) block(i, j) = (2.0 * rng.uniform01() - 1.0) * bound;
      }
    };
    params_.setZero();
    fill(w1(), in_, 1.0);
    fill(w2(), hidden_, 1.0);
    fill(w3(), hidden_, 0.01);
  }

  using MatMap = Eigen::Map<Eigen::MatrixXd>;
  using CMatMap = Eigen::Map<const Eigen::MatrixXd>;
  using VecMap = Eigen::Map<Eigen::VectorXd>;
  using CVecMap = Eigen::Map<const Eigen::VectorXd>;

  MatMap w1() { return {params_.data() + off_w1(), hidden_, in_}; }
  VecMap b1() { return {params_.data() + off_b1(), hidden_}; }
  MatMap w2() { return {params_.data() + off_w2(), hidden_, hidden_}; }
  VecMap b2() { return {params_.data() + off_b2(), hidden_}; }
  MatMap w3() { return {params_.data() + off_w3(), kOutputSize, hidden_}; }
  VecMap b3() { return {params_.data() + off_b3(), kOutputSize}; }
  [[nodiscard]] CMatMap w1() const { return {params_.data() + off_w1(), hidden_, in_}; }
  [[nodiscard]] CVecMap b1() const { return {params_.data() + off_b1(), hidden_}; }
  [[nodiscard]] CMatMap w2() const { return {params_.data() + off_w2(), hidden_, hidden_}; }
  [[nodiscard]] CVecMap b2() const { return {params_.data() + off_b2(), hidden_}; }
  [[nodiscard]] CMatMap w3() const { return {params_.data() + off_w3(), kOutputSize, hidden_}; }
  [[nodiscard]] CVecMap b3() const { return {params_.data() + off_b3(), kOutputSize}; }

  struct Activations {
    Eigen::MatrixXd h1, h2, out;
  };

  // Columns of `x` are samples.
  [[nodiscard]] Activations forward(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    Activations a;
    a.h1 = ((w1() * x).colwise() + b1()).array().tanh().matrix();
    a.h2 = ((w2() * a.h1).colwise() + b2()).array().tanh().matrix();
    a.out = (w3() * a.h2).colwise() + b3();
    return a;
  }

  // Accumulates d(loss)/d(params) into `grad` given d(loss)/d(out).
  void backward(const Eigen::Ref<const Eigen::MatrixXd>& x, const Activations& a,
                const Eigen::MatrixXd& d_out, Eigen::VectorXd& grad) const {
    const int in = in_, hid = hidden_;
    VecMap g(grad.data(), grad.size());
    MatMap(grad.data() + off_w3(), kOutputSize, hid).noalias() += d_out * a.h2.transpose();
    VecMap(grad.data() + off_b3(), kOutputSize) += d_out.rowwise().sum();
    const Eigen::MatrixXd d_h2 = (w3().transpose() * d_out).array() * (1.0 - a.h2.array().square());
    MatMap(grad.data() + off_w2(), hid, hid).noalias() += d_h2 * a.h1.transpose();
    VecMap(grad.data() + off_b2(), hid) += d_h2.rowwise().sum();
    const Eigen::MatrixXd d_h1 = (w2().transpose() * d_h2).array() * (1.0 - a.h1.array().square());
    MatMap(grad.data() + off_w1(), hid, in).noalias() += d_h1 * x.transpose();
    VecMap(grad.data() + off_b1(), hid) += d_h1.rowwise().sum();
  }

  [[nodiscard]] bool finite() const { return params_.allFinite(); }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint " + path);
    const std::int32_t header[2] = {in_, hidden_};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    out.write(reinterpret_cast<const char*>(params_.data()),
              static_cast<std::streamsize>(sizeof(double) * params_.size()));
  }

  static PolicyNet load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read checkpoint " + path);
    std::int32_t header[2] = {0, 0};
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!in || header[0] <= 0 || header[1] <= 0) throw ParseError("bad checkpoint header");
    PolicyNet net(header[0], header[1]);
    in.read(reinterpret_cast<char*>(net.params_.data()),
            static_cast<std::streamsize>(sizeof(double) * net.params_.size()));
    if (!in) throw ParseError("truncated checkpoint");
    return net;
  }

 private:
  [[nodiscard]] Eigen::Index off_w1() const { return 0; }
  [[nodiscard]] Eigen::Index off_b1() const { return off_w1() + static_cast<Eigen::Index>(hidden_) * in_; }
  [[nodiscard]] Eigen::Index off_w2() const { return off_b1() + hidden_; }
  [[nodiscard]] Eigen::Index off_b2() const { return off_w2() + static_cast<Eigen::Index>(hidden_) * hidden_; }
  [[nodiscard]] Eigen::Index off_w3() const { return off_b2() + hidden_; }
  [[nodiscard]] Eigen::Index off_b3() const { return off_w3() + static_cast<Eigen::Index>(kOutputSize) * hidden_; }

  int in_;
  int hidden_;
  Eigen::VectorXd params_;
};

}  // namespace talkitout::learner
