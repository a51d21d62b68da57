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

#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include "qforge/gradcheck.hpp"
#include "qforge/metrics.hpp"
#include "qforge/ops.hpp"

namespace qforge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

RunConfigSources CommonOptions::sources() const {
  RunConfigSources s;
  if (!preset.empty()) s.preset = preset;
  if (!config.empty()) s.config_file = config;
  s.overrides = sets;
  s.seed = seed;
  s.episodes = episodes;
  return s;
}

fs::path CommonOptions::output_dir(const RunConfig& rc) const {
  if (!out.empty()) return out;
  if (const char* env = std::getenv("QFORGE_OUT"); env != nullptr && *env != '\0') return env;
  std::string label = "run";
  if (!preset.empty()) {
    label = preset;
  } else if (!config.empty()) {
    label = fs::path(config).stem().string();
  }
  return fs::path("runs") / (label + "-seed" + std::to_string(rc.seed));
}

namespace {

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path probe = dir / ".qforge_write_test";
  std::ofstream out(probe);
  if (ec || !out) throw ConfigError("--out: directory " + dir.string() + " is not writable");
  out.close();
  fs::remove(probe, ec);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// Like format_number but always shows a decimal point for integral values.
std::string reward_text(double v) {
  std::string s = format_number(v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string checkpoint_name(std::size_t episode) {
  std::ostringstream name;
  name << "episode_" << std::setw(6) << std::setfill('0') << episode << ".qfc";
  return name.str();
}

}  // namespace

int run_train(const TrainOptions& o) {
  const RunConfig rc = resolve_run_config(o.common.sources());
  Trainer trainer(rc.agent, rc.model, rc.env);
  const fs::path out = o.common.output_dir(rc);
  prepare_dir(out);
  prepare_dir(out / "checkpoints");

  json manifest{
      {"version", version_string()},
      {"command", "train"},
      {"preset", o.common.preset.empty() ? json(nullptr) : json(o.common.preset)},
      {"config_file", o.common.config.empty() ? json(nullptr) : json(o.common.config)},
      {"overrides", o.common.sets},
      {"timing_columns", o.timing},
      {"stop_at", o.stop_at ? json(*o.stop_at) : json(nullptr)},
      {"config", to_json(rc)},
  };
  write_json(out / "run.json", manifest);

  MetricsSink sink(out, o.timing);
  std::ofstream events(out / "events.log", std::ios::trunc);
  std::optional<double> last_eval;

  TrainHooks hooks;
  hooks.on_episode = [&](const EpisodeRecord& r) {
    sink.write(r);
    if (r.eval_avg_reward) last_eval = r.eval_avg_reward;
    if (!o.quiet && r.eval_avg_reward)
      std::cout << "episode " << r.episode << '/' << rc.agent.episodes
                << " eval_avg_reward=" << format_number(*r.eval_avg_reward)
                << " epsilon=" << format_number(r.epsilon)
                << " mean_loss=" << format_number(r.mean_loss)
                << " loss_mode=" << loss_kind_name(r.loss_mode) << std::endl;
  };
  hooks.on_loss_switch = [&](const LossSwitch& s, std::size_t step) {
    std::ostringstream line;
    line << "step=" << step << " loss_switch " << loss_kind_name(s.from) << "->"
         << loss_kind_name(s.to) << " rule=" << s.rule
         << " statistic=" << format_number(s.statistic);
    events << line.str() << std::endl;
    if (!o.quiet) std::cerr << line.str() << '\n';
  };
  hooks.on_checkpoint = [&](std::size_t episode, const QNetwork& policy, bool final) {
    json meta{{"episode", episode},
              {"env", rc.env},
              {"eval_avg_reward", last_eval ? json(*last_eval) : json(nullptr)},
              {"run", to_json(rc)}};
    save_checkpoint(out / "checkpoints" / checkpoint_name(episode), policy, meta);
    if (final) save_checkpoint(out / "checkpoints" / "final.qfc", policy, meta);
  };
  if (o.stop_at) {
    const double target = *o.stop_at;
    hooks.should_stop = [target](const EpisodeRecord& r) {
      return r.eval_avg_reward && *r.eval_avg_reward >= target;
    };
  }

  const TrainSummary s = trainer.run(hooks);
  std::cout << "train: episodes=" << s.episodes << " steps=" << s.steps
            << " updates=" << s.updates << " last_eval="
            << (s.last_eval ? reward_text(*s.last_eval) : std::string("none"))
            << " out=" << out.string() << std::endl;
  return kExitOk;
}

int run_eval(const EvalOptions& o) {
  LoadedCheckpoint loaded = load_checkpoint(o.checkpoint);
  std::unique_ptr<QNetwork> model;
  std::string env_name = "catch";
  if (loaded.meta.contains("env") && loaded.meta["env"].is_string())
    env_name = loaded.meta["env"].get<std::string>();
  std::optional<RunConfig> rc;
  if (o.common.has_run_config()) {
    rc = resolve_run_config(o.common.sources());
    model = make_model(rc->model);
    load_checkpoint_into(o.checkpoint, *model);
    env_name = rc->env;
  } else {
    model = std::move(loaded.model);
  }
  if (!o.env.empty()) env_name = o.env;
  if (o.episodes == 0) throw ConfigError("--episodes: must be at least 1");

  auto env = make_env(env_name, o.seed);
  if (env->spec().action_count != model->config().actions)
    throw ConfigError("checkpoint has " + std::to_string(model->config().actions) +
                      " actions but env '" + env_name + "' has " +
                      std::to_string(env->spec().action_count));
  const EvalResult r =
      evaluate(greedy_policy(*model), *env, model->config().frames, o.episodes, o.seed);

  std::ostringstream line;
  line << "eval: checkpoint=" << o.checkpoint << " env=" << env_name
       << " episodes=" << o.episodes << " seed=" << o.seed
       << " average_reward=" << reward_text(r.average);
  std::cout << line.str() << std::endl;

  fs::path out;
  if (!o.common.out.empty()) {
    out = o.common.out;
  } else if (const char* env_out = std::getenv("QFORGE_OUT"); env_out && *env_out) {
    out = env_out;
  } else {
    out = fs::absolute(o.checkpoint).parent_path();
  }
  prepare_dir(out);
  std::ofstream log(out / "eval.log", std::ios::app);
  log << line.str() << '\n';
  return kExitOk;
}

namespace {

struct Timing {
  double mean = 0.0;
  double std = 0.0;
};

Timing summarize(const std::vector<double>& ms) {
  Timing t;
  t.mean = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
  double var = 0.0;
  for (double x : ms) var += (x - t.mean) * (x - t.mean);
  t.std = ms.size() > 1 ? std::sqrt(var / static_cast<double>(ms.size() - 1)) : 0.0;
  return t;
}

std::vector<Variant> pick_variants(const std::vector<std::string>& names) {
  if (names.empty()) return all_variants();
  std::vector<Variant> out;
  for (const auto& n : names) out.push_back(parse_variant(n));
  return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int run_bench(const BenchOptions& o) {
  if (o.iterations < 100) throw ConfigError("--iterations: at least 100 timed iterations");
  if (o.batch < 2) throw ConfigError("--batch: at least 2 (batch statistics)");
  const RunConfig rc = o.common.has_run_config() ? resolve_run_config(o.common.sources())
                                                 : run_config_from_json(json::object());
  const fs::path out = o.common.output_dir(rc);
  prepare_dir(out);

  std::ofstream csv(out / "bench.csv", std::ios::trunc);
  csv << "variant,params,batch,iterations,warmup,fwd_ms_mean,fwd_ms_std,fwd_bwd_ms_mean,"
         "fwd_bwd_ms_std,output_shape\n";
  std::cout << std::left << std::setw(18) << "variant" << std::setw(10) << "params"
            << std::setw(24) << "forward ms" << std::setw(24) << "forward+backward ms"
            << "output\n";

  Rng rng(mix_seed(rc.seed, 99));
  for (Variant v : pick_variants(o.variants)) {
    ModelConfig m = rc.model;
    if (m.variant != v) {
      m.variant = v;
      m.fc.clear();
      if (m.convs.empty()) m.convs = ModelConfig{}.convs;
    }
    auto net = make_model(m);
    const ModelConfig& c = net->config();
    std::vector<double> x(o.batch * c.frames * c.height * c.width);
    for (double& e : x) e = rng.uniform(-1.0, 1.0);
    const Tensor input = Tensor::from(Shape{o.batch, c.frames, c.height, c.width}, std::move(x));

    auto fwd_bwd = [&] {
      net->zero_grad();
      mean(net->forward(input)).backward();
    };
    net->set_training(true);
    for (std::size_t i = 0; i < o.warmup; ++i) fwd_bwd();

    std::vector<double> fwd, both;
    Shape out_shape;
    net->set_training(false);
    {
      NoGradGuard guard;
      for (std::size_t i = 0; i < o.iterations; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        out_shape = net->forward(input).shape();
        fwd.push_back(elapsed_ms(t0));
      }
    }
    net->set_training(true);
    for (std::size_t i = 0; i < o.iterations; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      fwd_bwd();
      both.push_back(elapsed_ms(t0));
    }
    const Timing tf = summarize(fwd), tb = summarize(both);
    std::ostringstream f, b;
    f << std::fixed << std::setprecision(3) << tf.mean << " +- " << tf.std;
    b << std::fixed << std::setprecision(3) << tb.mean << " +- " << tb.std;
    std::cout << std::left << std::setw(18) << variant_name(v) << std::setw(10)
              << net->param_count() << std::setw(24) << f.str() << std::setw(24) << b.str()
              << out_shape.str() << '\n';
    csv << variant_name(v) << ',' << net->param_count() << ',' << o.batch << ',' << o.iterations
        << ',' << o.warmup << ',' << format_number(tf.mean) << ',' << format_number(tf.std) << ','
        << format_number(tb.mean) << ',' << format_number(tb.std) << ",\"" << out_shape.str()
        << "\"\n";
  }
  std::cout << "bench: wrote " << (out / "bench.csv").string() << std::endl;
  return kExitOk;
}

namespace {

// Small enough that every parameter coordinate is checked in seconds.
ModelConfig tiny_config(Variant v, std::uint64_t seed) {
  ModelConfig m;
  m.variant = v;
  m.frames = 2;
  m.actions = 3;
  m.seed = seed;
  m.embed = 8;
  m.heads = 2;
  m.depth = 2;
  m.ff_dim = 16;
  switch (v) {
    case Variant::kDcqn:
      m.height = m.width = 12;
      m.convs = {{3, 4, 2}, {4, 3, 1}};
      m.fc = {6, 5};
      break;
    case Variant::kConvTransformer:
      m.height = m.width = 12;
      m.convs = {{3, 4, 2}, {4, 3, 1}};
      break;
    case Variant::kDtqnVit:
      m.height = m.width = 8;
      m.patch = 4;
      m.fc = {6, 5, 4};
      break;
    case Variant::kDtqnProj:
      m.height = m.width = 8;
      break;
  }
  return m;
}

}  // namespace

int run_grad_check(const GradCheckOptions& o) {
  bool ok = true;
  for (Variant v : pick_variants(o.variants)) {
    auto net = make_model(tiny_config(v, o.seed));
    const ModelConfig& c = net->config();
    Rng rng(mix_seed(o.seed, 7));
    const std::size_t batch = 3;
    std::vector<double> x(batch * c.frames * c.height * c.width), w(batch * c.actions);
    for (double& e : x) e = rng.uniform(-1.0, 1.0);
    for (double& e : w) e = rng.uniform(-1.0, 1.0);
    const Tensor input = Tensor::from(Shape{batch, c.frames, c.height, c.width}, std::move(x));
    const Tensor weights = Tensor::from(Shape{batch, c.actions}, std::move(w));
    net->set_training(true);
    const auto result = grad_check(
        net->parameters(), [&] { return sum(mul(net->forward(input), weights)); }, o.step, 0,
        o.seed, 1e-5);
    const bool pass = result.max_rel_error < o.tolerance;
    ok = ok && pass;
    std::cout << std::left << std::setw(18) << variant_name(v) << " params=" << net->param_count()
              << " coordinates=" << result.coordinates
              << " max_rel_error=" << std::scientific << std::setprecision(3)
              << result.max_rel_error << std::defaultfloat << " worst=" << result.worst << ' '
              << (pass ? "PASS" : "FAIL") << '\n';
  }
  return ok ? kExitOk : kExitFailure;
}

}  // namespace qforge::cli
