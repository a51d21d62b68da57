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

#include <chrono>
#include <cmath>
#include <limits>

#include "qforge/agent.hpp"
#include "qforge/ops.hpp"

namespace qforge {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Seed-stream labels for the independent generators of one run.
constexpr std::uint64_t kActionStream = 1;
constexpr std::uint64_t kSampleStream = 2;
constexpr std::uint64_t kEvalStream = 3;

}  // namespace

Policy greedy_policy(QNetwork& net) {
  return [&net](const Tensor& state) {
    Rng unused(0);
    return select_action(net, state, 0.0, unused);
  };
}

EvalResult evaluate(const Policy& policy, Environment& env, std::size_t frames,
                    std::size_t episodes, std::uint64_t seed, bool vary_seed) {
  if (episodes == 0) throw ConfigError("evaluate: episodes must be at least 1");
  EvalResult result;
  FrameStack stack(frames);
  for (std::size_t i = 0; i < episodes; ++i) {
    Tensor state = stack.reset(preprocess_frame(env.reset(vary_seed ? mix_seed(seed, i) : seed)));
    double total = 0.0;
    for (;;) {
      StepResult r = env.step(policy(state));
      total += r.reward;
      state = stack.push(preprocess_frame(r.frame));
      if (r.done) break;
    }
    result.returns.push_back(total);
    result.average += total;
  }
  result.average /= static_cast<double>(episodes);
  return result;
}

Trainer::Trainer(const AgentConfig& agent, const ModelConfig& model, const std::string& env_name)
    : config_(agent),
      model_config_(model.resolved()),
      env_name_(env_name),
      action_rng_(mix_seed(agent.seed, kActionStream)),
      sample_rng_(mix_seed(agent.seed, kSampleStream)),
      epsilon_(agent.eps_start) {
  config_.validate();
  env_ = make_env(env_name, config_.seed);
  eval_env_ = make_env(env_name, config_.seed);
  const EnvSpec& spec = env_->spec();
  if (model_config_.actions != spec.action_count)
    throw ConfigError("model.actions: " + std::to_string(model_config_.actions) +
                      " but environment '" + env_name + "' has " +
                      std::to_string(spec.action_count) + " actions");
  if (model_config_.height != kFrameSide || model_config_.width != kFrameSide)
    throw ConfigError("model.height/width: preprocessed frames are " +
                      std::to_string(kFrameSide) + "x" + std::to_string(kFrameSide));
  const Shape state_shape{model_config_.frames, kFrameSide, kFrameSide};
  if (config_.replay == ReplayMode::kFlat) {
    replay_ = std::make_unique<ReplayBuffer>(config_.replay_capacity, state_shape,
                                             spec.action_count);
  } else {
    const std::size_t records = std::max<std::size_t>(1, config_.replay_capacity / config_.seq_len);
    if (records < config_.seq_batch)
      throw ConfigError("agent.replay_capacity: holds fewer sequences than seq_batch");
    seq_replay_ = std::make_unique<SequenceReplay>(records, state_shape, config_.seq_batch,
                                                   config_.seq_len, spec.action_count);
  }
  learner_ = std::make_unique<Learner>(make_model(model_config_), make_model(model_config_),
                                       config_);
}

std::uint64_t Trainer::eval_seed(std::size_t eval_index) const {
  return mix_seed(mix_seed(config_.seed, kEvalStream), eval_index);
}

void Trainer::store(const Tensor& state, std::int64_t action, double reward, const Tensor& next,
                    bool done) {
  if (replay_) {
    replay_->add(state.values(), action, reward, next.values(), done);
    return;
  }
  window_.push_back(Transition{state, action, reward, next, done});
  if (window_.size() < config_.seq_len) return;
  const std::size_t len = window_.size();
  const std::size_t per = window_[0].state.numel();
  std::vector<std::size_t> dims{len};
  for (std::size_t d : window_[0].state.shape().dims()) dims.push_back(d);
  std::vector<double> states(len * per), nexts(len * per);
  SequenceRecord rec;
  for (std::size_t i = 0; i < len; ++i) {
    const auto s = window_[i].state.values();
    const auto n = window_[i].next_state.values();
    std::copy(s.begin(), s.end(), states.begin() + static_cast<std::ptrdiff_t>(i * per));
    std::copy(n.begin(), n.end(), nexts.begin() + static_cast<std::ptrdiff_t>(i * per));
    rec.actions.push_back(window_[i].action);
    rec.rewards.push_back(window_[i].reward);
    rec.dones.push_back(window_[i].done ? 1 : 0);
  }
  rec.states = Tensor::from(Shape(dims), std::move(states));
  rec.next_states = Tensor::from(Shape(dims), std::move(nexts));
  seq_replay_->add(rec);
  window_.clear();
}

bool Trainer::ready() const {
  if (replay_) return replay_->size() >= std::max(config_.batch_size, config_.warmup);
  const std::size_t warm = (config_.warmup + config_.seq_len - 1) / config_.seq_len;
  return seq_replay_->size() >= std::max(config_.seq_batch, warm);
}

TransitionBatch Trainer::sample() {
  if (replay_) return replay_->sample(config_.batch_size, sample_rng_);
  SequenceBatch s = seq_replay_->sample(sample_rng_);
  const std::size_t rows = s.batch * s.length;
  std::vector<std::size_t> dims{rows};
  const auto& sd = s.states.shape().dims();
  dims.insert(dims.end(), sd.begin() + 2, sd.end());
  TransitionBatch b;
  b.states = reshape(s.states, Shape(dims));
  b.next_states = reshape(s.next_states, Shape(dims));
  b.actions = std::move(s.actions);
  b.rewards = reshape(s.rewards, Shape{rows});
  b.dones = reshape(s.dones, Shape{rows});
  return b;
}

TrainSummary Trainer::run(const TrainHooks& hooks) {
  TrainSummary summary;
  const double rate = epsilon_decay_rate(config_.eps_start, config_.eps_end, config_.episodes);
  FrameStack stack(model_config_.frames);
  QNetwork& policy = learner_->policy();
  std::size_t evals = 0;
  std::size_t seen_switches = learner_->switches().size();

  for (std::size_t ep = 1; ep <= config_.episodes; ++ep) {
    EpisodeRecord rec;
    rec.episode = ep;
    rec.epsilon = epsilon_;
    const auto episode_start = Clock::now();
    double env_time = 0.0, loss_total = 0.0;
    std::size_t loss_count = 0;

    auto t0 = Clock::now();
    Tensor state = stack.reset(preprocess_frame(
        ep == 1 ? env_->reset(config_.seed) : env_->reset()));
    env_time += seconds_since(t0);
    window_.clear();

    for (;;) {
      const std::int64_t action = select_action(policy, state, epsilon_, action_rng_);
      t0 = Clock::now();
      StepResult r = env_->step(action);
      Tensor next = stack.push(preprocess_frame(r.frame));
      env_time += seconds_since(t0);
      store(state, action, r.reward, next, r.done);
      rec.total_reward += r.reward;
      ++rec.steps;
      ++global_step_;

      if (ready()) {
        const double loss = learner_->learn(sample());
        if (!std::isnan(loss)) {
          loss_total += loss;
          ++loss_count;
        }
        const auto& sw = learner_->switches();
        for (; seen_switches < sw.size(); ++seen_switches)
          if (hooks.on_loss_switch) hooks.on_loss_switch(sw[seen_switches], global_step_);
      }
      if (global_step_ % config_.target_sync == 0) learner_->sync_target();
      state = next;
      if (r.done) break;
    }

    rec.mean_loss = loss_count > 0 ? loss_total / static_cast<double>(loss_count)
                                   : std::numeric_limits<double>::quiet_NaN();
    rec.env_time_s = env_time;
    rec.step_time_ms = 1000.0 * seconds_since(episode_start) / static_cast<double>(rec.steps);
    epsilon_ = decay_epsilon(epsilon_, rate, config_.eps_end);

    const bool eval_now = config_.eval_period > 0 && ep % config_.eval_period == 0;
    if (eval_now) {
      const EvalResult ev = evaluate(greedy_policy(policy), *eval_env_, model_config_.frames,
                                     config_.eval_episodes, eval_seed(evals++));
      rec.eval_avg_reward = ev.average;
      summary.last_eval = ev.average;
      summary.best_eval = std::max(summary.best_eval, ev.average);
    }
    rec.loss_mode = learner_->selector().current();
    summary.episodes = ep;
    summary.steps = global_step_;
    summary.updates = learner_->updates();
    if (hooks.on_episode) hooks.on_episode(rec);
    const bool stop = hooks.should_stop && hooks.should_stop(rec);
    const bool last = stop || ep == config_.episodes;
    if (hooks.on_checkpoint && (eval_now || last)) hooks.on_checkpoint(ep, policy, last);
    if (stop) break;
  }
  return summary;
}

}  // namespace qforge
