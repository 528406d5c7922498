#pragma once

#include <optional>

#include "bpo/net/mlp.hpp"

namespace bpo::net {

/// How (state, belief) reach the head. kEncoded runs each present input through
/// its own two-layer tanh encoder and concatenates the equal-width outputs;
/// kRaw concatenates the raw vectors directly (the encoder-free variant).
enum class InputRouting { kEncoded, kRaw };

struct NetworkConfig {
  Index state_dim = 0;   // 0 = no state input
  Index belief_dim = 0;  // 0 = no belief input
  Index hidden = 32;
  Index output_dim = 1;
  InputRouting routing = InputRouting::kEncoded;
  double output_gain = 1.0;  // init scale of the final layer
};

/// State encoder, belief encoder and head packed into one flat parameter vector
/// with layout [state encoder | belief encoder | head].
class DualEncoderNet {
 public:
  struct Cache {
    Mlp::Cache state;
    Mlp::Cache belief;
    Mlp::Cache head;
  };

  DualEncoderNet() = default;

  explicit DualEncoderNet(const NetworkConfig& cfg) : cfg_(cfg) {
    if (cfg.state_dim < 0 || cfg.belief_dim < 0 || cfg.hidden <= 0 || cfg.output_dim <= 0)
      throw ConfigError("network dimensions must be nonnegative (inputs) and positive (hidden, output)");
    if (cfg.state_dim + cfg.belief_dim == 0) throw ConfigError("network needs at least one input");
    Index offset = 0;
    Index head_in = 0;
    if (cfg.routing == InputRouting::kEncoded) {
      if (cfg.state_dim > 0) {
        state_encoder_ = Mlp(cfg.state_dim, {cfg.hidden, cfg.hidden}, Activation::kTanh, Activation::kTanh, offset);
        offset += state_encoder_->num_params();
        head_in += cfg.hidden;
      }
      if (cfg.belief_dim > 0) {
        belief_encoder_ = Mlp(cfg.belief_dim, {cfg.hidden, cfg.hidden}, Activation::kTanh, Activation::kTanh, offset);
        offset += belief_encoder_->num_params();
        head_in += cfg.hidden;
      }
    } else {
      head_in = cfg.state_dim + cfg.belief_dim;
    }
    head_ = Mlp(head_in, {cfg.hidden, cfg.hidden, cfg.output_dim}, Activation::kTanh, Activation::kLinear, offset);
    num_params_ = offset + head_.num_params();
  }

  const NetworkConfig& config() const { return cfg_; }
  Index num_params() const { return num_params_; }
  const Mlp& head() const { return head_; }
  const std::optional<Mlp>& state_encoder() const { return state_encoder_; }
  const std::optional<Mlp>& belief_encoder() const { return belief_encoder_; }

  Matrix forward(const Vector& theta, const Matrix& states, const Matrix& beliefs, Cache& cache) const {
    check_inputs(states, beliefs);
    return head_forward(theta, head_input(theta, states, beliefs, cache), cache);
  }

  Matrix forward(const Vector& theta, const Matrix& states, const Matrix& beliefs) const {
    Cache cache;
    return forward(theta, states, beliefs, cache);
  }

  /// Adds dL/dtheta for upstream gradient `d_out` (output_dim x N) into `grad`.
  void backward(const Vector& theta, const Cache& cache, const Matrix& d_out, Vector& grad) const {
    const bool encoded = cfg_.routing == InputRouting::kEncoded;
    Matrix d_in = head_.backward(theta, cache.head, d_out, grad, encoded);
    if (!encoded) return;
    Index row = 0;
    if (state_encoder_) {
      state_encoder_->backward(theta, cache.state, d_in.middleRows(row, cfg_.hidden), grad, false);
      row += cfg_.hidden;
    }
    if (belief_encoder_) belief_encoder_->backward(theta, cache.belief, d_in.middleRows(row, cfg_.hidden), grad, false);
  }

  /// Directional derivative of the output along parameter tangent `v`.
  Matrix jvp(const Vector& theta, const Vector& v, const Cache& cache) const {
    if (cfg_.routing == InputRouting::kRaw) return head_.jvp(theta, v, cache.head, nullptr);
    Matrix d_in(head_.input_dim(), cache.head.acts[0].cols());
    Index row = 0;
    if (state_encoder_) {
      d_in.middleRows(row, cfg_.hidden) = state_encoder_->jvp(theta, v, cache.state, nullptr);
      row += cfg_.hidden;
    }
    if (belief_encoder_) d_in.middleRows(row, cfg_.hidden) = belief_encoder_->jvp(theta, v, cache.belief, nullptr);
    return head_.jvp(theta, v, cache.head, &d_in);
  }

  void init(Vector& theta, Rng& rng) const {
    if (state_encoder_) state_encoder_->init(theta, 1.0, rng);
    if (belief_encoder_) belief_encoder_->init(theta, 1.0, rng);
    head_.init(theta, cfg_.output_gain, rng);
  }

 private:
  void check_inputs(const Matrix& states, const Matrix& beliefs) const {
    const bool state_ok = cfg_.state_dim == 0 || states.rows() == cfg_.state_dim;
    const bool belief_ok = cfg_.belief_dim == 0 || beliefs.rows() == cfg_.belief_dim;
    if (!state_ok || !belief_ok) throw ConfigError("network input width mismatch");
  }

  Matrix head_input(const Vector& theta, const Matrix& states, const Matrix& beliefs, Cache& cache) const {
    const Index n = cfg_.state_dim > 0 ? states.cols() : beliefs.cols();
    Matrix in(head_.input_dim(), n);
    Index row = 0;
    if (cfg_.routing == InputRouting::kRaw) {
      if (cfg_.state_dim > 0) in.topRows(cfg_.state_dim) = states;
      if (cfg_.belief_dim > 0) in.bottomRows(cfg_.belief_dim) = beliefs;
      return in;
    }
    if (state_encoder_) {
      state_encoder_->forward(theta, states, cache.state);
      in.middleRows(row, cfg_.hidden) = cache.state.acts.back();
      row += cfg_.hidden;
    }
    if (belief_encoder_) {
      belief_encoder_->forward(theta, beliefs, cache.belief);
      in.middleRows(row, cfg_.hidden) = cache.belief.acts.back();
    }
    return in;
  }

  Matrix head_forward(const Vector& theta, Matrix in, Cache& cache) const {
    head_.forward(theta, in, cache.head);
    return cache.head.acts.back();
  }

  NetworkConfig cfg_;
  std::optional<Mlp> state_encoder_;
  std::optional<Mlp> belief_encoder_;
  Mlp head_;
  Index num_params_ = 0;
};

}  // namespace bpo::net
