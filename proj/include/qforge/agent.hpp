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

#pragma once

// Deep Q-learning: epsilon-greedy control, TD targets, the Huber/MSE loss
// selector, AdamW, target-network synchronization, training and greedy
// evaluation.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qforge/envs.hpp"
#include "qforge/models.hpp"
#include "qforge/replay.hpp"

namespace qforge {

enum class LossMode { kHuber, kMse, kAuto };
enum class LossKind { kHuber, kMse };
enum class ReplayMode { kFlat, kSequence };

LossMode parse_loss_mode(const std::string& text);
const char* loss_mode_name(LossMode m);
const char* loss_kind_name(LossKind k);
ReplayMode parse_replay_mode(const std::string& text);
const char* replay_mode_name(ReplayMode m);

struct AgentConfig {
  double lr = 1e-4;
  double gamma = 0.99;
  std::size_t batch_size = 32;
  std::size_t replay_capacity = 1'000'000;
  std::size_t target_sync = 500;  // steps
  std::size_t episodes = 10'000;
  double eps_start = 1.0;
  double eps_end = 0.1;
  double weight_decay = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  LossMode loss_mode = LossMode::kAuto;
  double huber_delta = 1.0;
  std::size_t eval_period = 500;  // episodes
  std::size_t eval_episodes = 5;
  std::size_t loss_window = 500;  // steps
  double tau_flat = 1e-3;
  double tau_vol = 5.0;
  std::size_t warmup = 1000;  // transitions stored before learning starts
  double grad_clip = 10.0;    // global norm; 0 disables
  ReplayMode replay = ReplayMode::kFlat;
  std::size_t seq_len = 8;
  std::size_t seq_batch = 4;
  std::uint64_t seed = 42;

  // Throws ConfigError naming the first invalid field.
  void validate() const;
};

nlohmann::json to_json(const AgentConfig& c);
AgentConfig agent_config_from_json(const nlohmann::json& j, AgentConfig base = {});

// ---- exploration -----------------------------------------------------------

// (end / start)^(1 / episodes)
double epsilon_decay_rate(double start, double end, std::size_t episodes);
// max(end, eps * rate)
double decay_epsilon(double eps, double rate, double end);

// Index of the largest value; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

// Draws u ~ U[0,1); if u < eps returns a uniform random action, otherwise the
// greedy action of q (shape [A] or [1, A]).
std::int64_t epsilon_greedy(const Tensor& q, double eps, Rng& rng);

// Evaluates the network on one state [F, H, W] in eval mode without
// recording a graph, then applies epsilon_greedy.
std::int64_t select_action(QNetwork& net, const Tensor& state, double eps, Rng& rng);

// ---- learning --------------------------------------------------------------

// y = r + gamma * (1 - done) * max_a' next_q[:, a']; never tracks gradients.
Tensor td_targets(const Tensor& rewards, const Tensor& dones, const Tensor& next_q, double gamma);

Tensor compute_loss(const Tensor& pred, const Tensor& target, LossKind kind, double delta);

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// Decoupled weight decay:
//   m <- b1 m + (1 - b1) g;  v <- b2 v + (1 - b2) g^2
//   theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + wd * theta)
// Parameters without a gradient are left untouched.
class AdamW {
 public:
  AdamW(std::vector<nn::NamedTensor> params, const AdamWConfig& config);

  void step();
  std::size_t steps() const { return t_; }
  const AdamWConfig& config() const { return config_; }
  AdamWConfig& mutable_config() { return config_; }

 private:
  std::vector<nn::NamedTensor> params_;
  std::vector<std::vector<double>> m_, v_;
  AdamWConfig config_;
  std::size_t t_ = 0;
};

// Scales all gradients so their joint L2 norm is at most max_norm; returns
// the norm before scaling.
double clip_grad_norm(const std::vector<nn::NamedTensor>& params, double max_norm);

struct LossSwitch {
  LossKind from;
  LossKind to;
  std::string rule;  // "flat", "volatile" or "nan"
  double statistic;  // relative range, coefficient of variation, or NaN
};

// One application of the switching rules to a loss history.
//   huber -> mse when the window is full, finite and
//            (max - min) / max(|mean|, 1e-12) < tau_flat;
//   mse -> huber when the window holds a NaN, or when it is full and
//            std / max(|mean|, 1e-12) > tau_vol.
std::optional<LossSwitch> loss_switch_rule(std::span<const double> history, std::size_t window,
                                           LossKind current, double tau_flat, double tau_vol);

class LossSelector {
 public:
  LossSelector(LossMode mode, std::size_t window, double tau_flat, double tau_vol);

  LossKind current() const { return current_; }
  // Records one loss; returns the switch if one fired. The history is
  // cleared after every switch. Fixed modes never switch.
  std::optional<LossSwitch> update(double loss);
  const std::vector<double>& history() const { return history_; }

 private:
  LossMode mode_;
  LossKind current_;
  std::size_t window_;
  double tau_flat_, tau_vol_;
  std::vector<double> history_;
};

// Policy/target pair plus optimizer and loss selection.
class Learner {
 public:
  Learner(std::unique_ptr<QNetwork> policy, std::unique_ptr<QNetwork> target,
          const AgentConfig& config);

  // One TD update on a batch; returns the loss (NaN if the loss could not be
  // computed, in which case no parameters change).
  double learn(const TransitionBatch& batch);
  void sync_target();

  QNetwork& policy() { return *policy_; }
  QNetwork& target() { return *target_; }
  AdamW& optimizer() { return optimizer_; }
  LossSelector& selector() { return selector_; }
  const std::vector<LossSwitch>& switches() const { return switches_; }
  std::size_t updates() const { return updates_; }

 private:
  std::unique_ptr<QNetwork> policy_, target_;
  AgentConfig config_;
  AdamW optimizer_;
  LossSelector selector_;
  std::vector<LossSwitch> switches_;
  std::size_t updates_ = 0;
};

// ---- evaluation ------------------------------------------------------------

using Policy = std::function<std::int64_t(const Tensor& state)>;

// Greedy (epsilon = 0) policy over a network in eval mode.
Policy greedy_policy(QNetwork& net);

struct EvalResult {
  double average = 0.0;
  std::vector<double> returns;
};

// Runs `episodes` episodes with frame stacks of `frames`. Episode i resets
// the environment with mix_seed(seed, i), or with `seed` itself for every
// episode when vary_seed is false.
EvalResult evaluate(const Policy& policy, Environment& env, std::size_t frames,
                    std::size_t episodes, std::uint64_t seed, bool vary_seed = true);

// ---- training --------------------------------------------------------------

struct EpisodeRecord {
  std::size_t episode = 0;  // 1-based
  double total_reward = 0.0;
  double mean_loss = 0.0;  // NaN when no update ran this episode
  double epsilon = 0.0;    // value used during the episode
  std::size_t steps = 0;
  double env_time_s = 0.0;
  double step_time_ms = 0.0;
  std::optional<double> eval_avg_reward;
  LossKind loss_mode = LossKind::kHuber;  // mode at episode end
};

struct TrainHooks {
  std::function<void(const EpisodeRecord&)> on_episode;
  std::function<void(const LossSwitch&, std::size_t step)> on_loss_switch;
  // Called after each evaluation and once at the end of the run.
  std::function<void(std::size_t episode, const QNetwork& policy, bool final)> on_checkpoint;
  // Returning true ends the run after the current episode.
  std::function<bool(const EpisodeRecord&)> should_stop;
};

struct TrainSummary {
  std::size_t episodes = 0;
  std::size_t steps = 0;
  std::size_t updates = 0;
  std::optional<double> last_eval;
  double best_eval = -1e300;
};

class Trainer {
 public:
  // Throws ConfigError if the configs disagree (frames, actions) or are
  // invalid; nothing is trained in that case.
  Trainer(const AgentConfig& agent, const ModelConfig& model, const std::string& env_name);

  TrainSummary run(const TrainHooks& hooks = {});

  Learner& learner() { return *learner_; }
  std::size_t global_step() const { return global_step_; }
  double epsilon() const { return epsilon_; }
  // Seed used for the evaluation after `eval_index` periods.
  std::uint64_t eval_seed(std::size_t eval_index) const;

 private:
  void store(const Tensor& state, std::int64_t action, double reward, const Tensor& next,
             bool done);
  bool ready() const;
  TransitionBatch sample();

  AgentConfig config_;
  ModelConfig model_config_;
  std::string env_name_;
  std::unique_ptr<Environment> env_, eval_env_;
  std::unique_ptr<Learner> learner_;
  std::unique_ptr<ReplayBuffer> replay_;
  std::unique_ptr<SequenceReplay> seq_replay_;
  std::vector<Transition> window_;
  Rng action_rng_, sample_rng_;
  std::size_t global_step_ = 0;
  double epsilon_;
};

}  // namespace qforge
