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

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "qforge/config.hpp"
#include "qforge/replay.hpp"

namespace {

using namespace qforge;

void add_common(CLI::App* cmd, cli::CommonOptions& o) {
  cmd->add_option("--preset", o.preset, "Named preset (see --list-presets)");
  cmd->add_option("--config", o.config, "JSON config file, merged over the preset")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Seed for the agent, model and environment");
  cmd->add_option("--out", o.out, "Output directory (default $QFORGE_OUT)");
  cmd->add_option("-s,--set", o.sets, "Dotted override, e.g. agent.lr=3e-4 (repeatable)")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qforge: deep Q-learning with convolutional and transformer Q-networks"};
  app.set_version_flag("--version", version_string());
  bool list_presets = false;
  app.add_flag("--list-presets", list_presets, "Print the available presets and exit");
  app.require_subcommand(0, 1);

  cli::TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train an agent and write metrics and checkpoints");
  add_common(train_cmd, train.common);
  train_cmd->add_option("--episodes", train.common.episodes, "Override agent.episodes");
  train_cmd->add_flag("--timing", train.timing, "Also write timing columns into metrics.csv");
  train_cmd->add_option("--stop-at", train.stop_at,
                        "Stop once an evaluation average reaches this reward");
  train_cmd->add_flag("--quiet", train.quiet, "Only print the final summary");

  cli::EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Greedy evaluation of a checkpoint");
  add_common(eval_cmd, eval.common);
  eval_cmd->add_option("checkpoint,--checkpoint", eval.checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--episodes", eval.episodes, "Evaluation episodes")->capture_default_str();
  eval_cmd->add_option("--env", eval.env, "Environment (default: recorded in the checkpoint)");

  cli::BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time forward and forward+backward passes");
  add_common(bench_cmd, bench.common);
  bench_cmd->add_option("--batch", bench.batch, "Batch size")->capture_default_str();
  bench_cmd->add_option("--iterations", bench.iterations, "Timed iterations (at least 100)")
      ->capture_default_str();
  bench_cmd->add_option("--warmup", bench.warmup, "Untimed warmup iterations")
      ->capture_default_str();
  bench_cmd->add_option("--variants", bench.variants, "Subset of variants")->take_all();

  cli::GradCheckOptions grad;
  auto* grad_cmd = app.add_subcommand("grad-check", "Finite-difference check of every variant");
  grad_cmd->add_option("--variants", grad.variants, "Subset of variants")->take_all();
  grad_cmd->add_option("--tolerance", grad.tolerance, "Maximum relative error")
      ->capture_default_str();
  grad_cmd->add_option("--step", grad.step, "Central difference step")->capture_default_str();
  grad_cmd->add_option("--seed", grad.seed, "Seed for inputs and weights");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitConfig;
  }

  try {
    if (list_presets) {
      for (const auto& name : preset_names()) std::cout << name << '\n';
      return cli::kExitOk;
    }
    if (train_cmd->parsed()) return cli::run_train(train);
    if (eval_cmd->parsed()) {
      eval.seed = eval.common.seed.value_or(eval.seed);
      return cli::run_eval(eval);
    }
    if (bench_cmd->parsed()) return cli::run_bench(bench);
    if (grad_cmd->parsed()) return cli::run_grad_check(grad);
    std::cerr << app.help();
    return cli::kExitConfig;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return cli::kExitCheckpoint;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitFailure;
  }
}
