// Copyright 2026 The qforge Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qforge/agent.hpp"
#include "qforge/ops.hpp"

namespace qforge {

double epsilon_decay_rate(double start, double end, std::size_t episodes) {
  if (!(start > 0.0) || !(end > 0.0) || episodes == 0)
    throw ConfigError("epsilon schedule: start and end must be positive, episodes >= 1");
  return std::pow(end / start, 1.0 / static_cast<double>(episodes));
}

double decay_epsilon(double eps, double rate, double end) { return std::max(end, eps * rate); }

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw DimensionError("argmax: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

std::int64_t epsilon_greedy(const Tensor& q, double eps, Rng& rng) {
  const Shape& s = q.shape();
  if (!(s.rank() == 1 || (s.rank() == 2 && s[0] == 1)))
    throw DimensionError("epsilon_greedy: expected [A] or [1, A], got " + s.str());
  const std::size_t actions = s.back();
  const double u = rng.uniform();
  if (u < eps) return static_cast<std::int64_t>(rng.uniform_int(actions));
  return static_cast<std::int64_t>(argmax(q.values()));
}

std::int64_t select_action(QNetwork& net, const Tensor& state, double eps, Rng& rng) {
  std::vector<std::size_t> dims{1};
  for (std::size_t d : state.shape().dims()) dims.push_back(d);
  const bool was_training = net.training();
  net.set_training(false);
  Tensor q;
  {
    NoGradGuard guard;
    q = net.forward(reshape(state, Shape(dims)));
  }
  net.set_training(was_training);
  return epsilon_greedy(q, eps, rng);
}

Tensor td_targets(const Tensor& rewards, const Tensor& dones, const Tensor& next_q, double gamma) {
  const Shape& s = next_q.shape();
  if (s.rank() != 2 || rewards.shape() != Shape{s[0]} || dones.shape() != Shape{s[0]})
    throw DimensionError("td_targets: rewards " + rewards.shape().str() + ", dones " +
                         dones.shape().str() + ", next_q " + s.str());
  const std::size_t k = s[0], actions = s[1];
  const auto q = next_q.values();
  const auto r = rewards.values();
  const auto d = dones.values();
  std::vector<double> y(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double best = q[i * actions + argmax(q.subspan(i * actions, actions))];
    y[i] = r[i] + gamma * (1.0 - d[i]) * best;
  }
  return Tensor::from(Shape{k}, std::move(y));
}

Tensor compute_loss(const Tensor& pred, const Tensor& target, LossKind kind, double delta) {
  return kind == LossKind::kHuber ? huber_loss(pred, target, delta) : mse_loss(pred, target);
}

AdamW::AdamW(std::vector<nn::NamedTensor> params, const AdamWConfig& config)
    : params_(std::move(params)), config_(config) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor.numel(), 0.0);
    v_.emplace_back(p.tensor.numel(), 0.0);
  }
}

void AdamW::step() {
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i].tensor;
    if (!p.has_grad()) continue;
    const auto g = p.grad();
    auto theta = p.mutable_values();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < theta.size(); ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      theta[j] -= config_.lr * (m_hat / (std::sqrt(v_hat) + config_.eps) +
                                config_.weight_decay * theta[j]);
    }
  }
}

double clip_grad_norm(const std::vector<nn::NamedTensor>& params, double max_norm) {
  double total = 0.0;
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) total += g * g;
  }
  const double norm = std::sqrt(total);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto p : params) {
      if (!p.tensor.has_grad()) continue;
      for (double& g : p.tensor.mutable_grad()) g *= factor;
    }
  }
  return norm;
}

std::optional<LossSwitch> loss_switch_rule(std::span<const double> history, std::size_t window,
                                           LossKind current, double tau_flat, double tau_vol) {
  const std::size_t n = std::min(history.size(), window);
  const auto recent = history.subspan(history.size() - n, n);
  const bool has_nan = std::any_of(recent.begin(), recent.end(), [](double x) {
    return std::isnan(x);
  });
  if (current == LossKind::kMse && has_nan)
    return LossSwitch{LossKind::kMse, LossKind::kHuber, "nan",
                      std::numeric_limits<double>::quiet_NaN()};
  if (n < window || has_nan) return std::nullopt;

  double mean = 0.0, lo = recent[0], hi = recent[0];
  for (double x : recent) {
    mean += x;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  mean /= static_cast<double>(n);
  const double scale = std::max(std::abs(mean), 1e-12);
  if (current == LossKind::kHuber) {
    const double range = (hi - lo) / scale;
    if (range < tau_flat) return LossSwitch{LossKind::kHuber, LossKind::kMse, "flat", range};
    return std::nullopt;
  }
  double var = 0.0;
  for (double x : recent) var += (x - mean) * (x - mean);
  const double cv = std::sqrt(var / static_cast<double>(n)) / scale;
  if (cv > tau_vol) return LossSwitch{LossKind::kMse, LossKind::kHuber, "volatile", cv};
  return std::nullopt;
}

LossSelector::LossSelector(LossMode mode, std::size_t window, double tau_flat, double tau_vol)
    : mode_(mode),
      current_(mode == LossMode::kMse ? LossKind::kMse : LossKind::kHuber),
      window_(window),
      tau_flat_(tau_flat),
      tau_vol_(tau_vol) {
  if (window < 1) throw ConfigError("loss selector: window must be at least 1");
}

std::optional<LossSwitch> LossSelector::update(double loss) {
  if (mode_ != LossMode::kAuto) return std::nullopt;
  history_.push_back(loss);
  if (history_.size() > window_) history_.erase(history_.begin());
  auto sw = loss_switch_rule(history_, window_, current_, tau_flat_, tau_vol_);
  if (sw) {
    current_ = sw->to;
    history_.clear();
  }
  return sw;
}

namespace {

AdamWConfig adamw_config(const AgentConfig& c) {
  return AdamWConfig{c.lr, c.adam_beta1, c.adam_beta2, c.adam_eps, c.weight_decay};
}

}  // namespace

Learner::Learner(std::unique_ptr<QNetwork> policy, std::unique_ptr<QNetwork> target,
                 const AgentConfig& config)
    : policy_(std::move(policy)),
      target_(std::move(target)),
      config_(config),
      optimizer_(policy_->parameters(), adamw_config(config)),
      selector_(config.loss_mode, config.loss_window, config.tau_flat, config.tau_vol) {
  sync_target();
  target_->set_training(false);
}

void Learner::sync_target() { target_->copy_state_from(*policy_); }

double Learner::learn(const TransitionBatch& batch) {
  target_->set_training(false);
  Tensor y;
  {
    NoGradGuard guard;
    y = td_targets(batch.rewards, batch.dones, target_->forward(batch.next_states),
                   config_.gamma);
  }
  policy_->set_training(true);
  double value = std::numeric_limits<double>::quiet_NaN();
  Tensor loss;
  try {
    const Tensor pred = gather_last(policy_->forward(batch.states), batch.actions);
    loss = compute_loss(pred, y, selector_.current(), config_.huber_delta);
    value = loss.item();
  } catch (const NumericError&) {
  }
  if (std::isfinite(value)) {
    policy_->zero_grad();
    loss.backward();
    if (config_.grad_clip > 0.0) clip_grad_norm(policy_->parameters(), config_.grad_clip);
    optimizer_.step();
    ++updates_;
  }
  if (auto sw = selector_.update(value)) switches_.push_back(*sw);
  return value;
}

}  // namespace qforge
