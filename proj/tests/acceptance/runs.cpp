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

#include <sys/resource.h>
#include <sys/wait.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "harness.hpp"
#include "qforge/envs.hpp"
#include "qforge/metrics.hpp"
#include "qforge/models.hpp"

#ifndef QFORGE_CLI_PATH
#error "QFORGE_CLI_PATH must name the qforge executable"
#endif
#ifndef QFORGE_ACCEPTANCE_DIR
#error "QFORGE_ACCEPTANCE_DIR must name a scratch directory"
#endif

namespace qforge::acceptance {
namespace {

namespace fs = std::filesystem;

struct ChildRun {
  int exit_code = -1;
  double cpu_s = 0.0;
  double wall_s = 0.0;
};

double children_cpu_seconds() {
  rusage usage{};
  getrusage(RUSAGE_CHILDREN, &usage);
  return static_cast<double>(usage.ru_utime.tv_sec + usage.ru_stime.tv_sec) +
         1e-6 * static_cast<double>(usage.ru_utime.tv_usec + usage.ru_stime.tv_usec);
}

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

ChildRun run_cli(const std::vector<std::string>& args, const fs::path& log) {
  std::string cmd = quote(QFORGE_CLI_PATH);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " > " + quote(log.string()) + " 2>&1";
  const double cpu0 = children_cpu_seconds();
  const auto t0 = std::chrono::steady_clock::now();
  const int status = std::system(cmd.c_str());
  ChildRun r;
  r.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.cpu_s = children_cpu_seconds() - cpu0;
  r.exit_code = status != -1 && WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path(QFORGE_ACCEPTANCE_DIR) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(path);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

struct LearningTrace {
  std::size_t episodes = 0;
  std::optional<std::size_t> reached_at;
  double best = -1e300;
  std::size_t evals = 0;
};

// Scans eval_avg_reward; `strict` asks for > instead of >=.
LearningTrace scan(const fs::path& metrics, double threshold, bool strict) {
  LearningTrace t;
  const auto rows = read_csv(metrics);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() < 9) continue;
    t.episodes = std::stoul(rows[i][0]);
    if (rows[i][7].empty()) continue;
    const double eval = std::stod(rows[i][7]);
    ++t.evals;
    t.best = std::max(t.best, eval);
    const bool hit = strict ? eval > threshold : eval >= threshold;
    if (hit && !t.reached_at) t.reached_at = t.episodes;
  }
  return t;
}

// Plays the greedy policy of a checkpoint from every spawn column.
std::size_t columns_caught(const fs::path& checkpoint) {
  auto loaded = load_checkpoint(checkpoint);
  QNetwork& net = *loaded.model;
  net.set_training(false);
  NoGradGuard guard;
  std::size_t caught = 0;
  for (std::size_t col = 0; col < CatchEnv::kGrid; ++col) {
    CatchEnv env;
    FrameStack stack(net.config().frames);
    Tensor state = stack.reset(preprocess_frame(env.reset_to(col)));
    for (;;) {
      const Shape& s = state.shape();
      const Tensor q = net.forward(reshape(state, Shape{1, s[0], s[1], s[2]}));
      const auto v = q.values();
      const auto best = std::max_element(v.begin(), v.end()) - v.begin();
      StepResult r = env.step(best);
      state = stack.push(preprocess_frame(r.frame));
      if (r.done) {
        caught += r.reward > 0 ? 1 : 0;
        break;
      }
    }
  }
  return caught;
}

// ---- 8 ---------------------------------------------------------------------

Outcome determinism() {
  Verdict v;
  std::vector<std::string> texts;
  double worst_cpu = 0.0;
  for (const char* name : {"a", "b"}) {
    const fs::path dir = fresh_dir(std::string("determinism/") + name);
    const ChildRun r = run_cli({"train", "--preset", "catch-dcqn-desk", "--seed", "42",
                                "--episodes", "200", "--out", dir.string(), "--quiet"},
                               dir / "stdout.log");
    v.require(r.exit_code == 0, std::string("run ") + name + " exited " + std::to_string(r.exit_code));
    v.require(r.cpu_s < 300.0, std::string("run ") + name + " took " + fmt("%.0f s CPU", r.cpu_s));
    worst_cpu = std::max(worst_cpu, r.cpu_s);
    texts.push_back(slurp(dir / "metrics.csv"));
  }
  const std::string header = std::string(kMetricsHeader) + "\n";
  v.require(texts[0].compare(0, header.size(), header) == 0, "metrics.csv header mismatch");
  const auto lines = std::count(texts[0].begin(), texts[0].end(), '\n');
  v.require(lines == 201, "metrics.csv has " + std::to_string(lines) + " lines");
  v.require(!texts[0].empty() && texts[0] == texts[1], "metrics.csv differs between runs");
  return v.finish("2 x 200 episodes, " + std::to_string(texts[0].size()) +
                  " identical bytes, slowest run " + fmt("%.0f s CPU", worst_cpu));
}

// ---- 9 ---------------------------------------------------------------------

Outcome learning_dcqn() {
  const fs::path dir = fresh_dir("learning_dcqn");
  const ChildRun r = run_cli({"train", "--preset", "catch-dcqn-desk", "--seed", "42",
                              "--stop-at", "0.9", "--out", dir.string(), "--quiet"},
                             dir / "stdout.log");
  Verdict v;
  v.require(r.exit_code == 0, "train exited " + std::to_string(r.exit_code));
  const LearningTrace t = scan(dir / "metrics.csv", 0.9, false);
  v.require(t.reached_at && *t.reached_at <= 2000,
            "best eval " + fmt("%.3f", t.best) + " after " + std::to_string(t.episodes) +
                " episodes, threshold 0.9");
  v.require(r.cpu_s < 1800.0, "took " + fmt("%.0f s CPU", r.cpu_s) + " (budget 1800 s)");
  std::string summary = "best eval " + fmt("%.3f", t.best) + " over " + std::to_string(t.evals) +
                        " evals, " + std::to_string(t.episodes) + " episodes, " +
                        fmt("%.0f s CPU", r.cpu_s);
  if (t.reached_at) summary += ", reached at episode " + std::to_string(*t.reached_at);
  if (fs::exists(dir / "checkpoints" / "final.qfc"))
    summary += ", final policy catches " +
               std::to_string(columns_caught(dir / "checkpoints" / "final.qfc")) + "/21 columns";
  return v.finish(summary);
}

// ---- 10 --------------------------------------------------------------------

// Monte-Carlo oracle for the uniform-random policy.
double random_catch_baseline(std::size_t episodes) {
  CatchEnv env(12345);
  Rng rng(54321);
  double total = 0.0;
  for (std::size_t e = 0; e < episodes; ++e) {
    env.reset();
    for (;;) {
      const StepResult r = env.step(static_cast<std::int64_t>(rng.uniform_int(3)));
      if (r.done) {
        total += r.reward;
        break;
      }
    }
  }
  return total / static_cast<double>(episodes);
}

Outcome learning_dtqn() {
  const double baseline = random_catch_baseline(10000);
  const double threshold = baseline + 0.5 * (1.0 - baseline);
  const fs::path dir = fresh_dir("learning_dtqn");
  const ChildRun r = run_cli({"train", "--preset", "catch-dtqn-proj-desk", "--seed", "42",
                              "--stop-at", fmt("%.17g", threshold), "--out", dir.string(),
                              "--quiet"},
                             dir / "stdout.log");
  Verdict v;
  v.require(r.exit_code == 0, "train exited " + std::to_string(r.exit_code));
  const LearningTrace t = scan(dir / "metrics.csv", threshold, true);
  v.require(t.reached_at && *t.reached_at <= 3000,
            "best eval " + fmt("%.3f", t.best) + " after " + std::to_string(t.episodes) +
                " episodes, threshold " + fmt("%.4f", threshold));
  v.require(r.cpu_s < 3600.0, "took " + fmt("%.0f s CPU", r.cpu_s) + " (budget 3600 s)");
  std::string summary = "random baseline " + fmt("%.4f", baseline) + " (10^4 episodes), threshold " +
                        fmt("%.4f", threshold) + ", best eval " + fmt("%.3f", t.best) + ", " +
                        std::to_string(t.episodes) + " episodes, " + fmt("%.0f s CPU", r.cpu_s);
  if (t.reached_at) summary += ", exceeded at episode " + std::to_string(*t.reached_at);
  return v.finish(summary);
}

}  // namespace

std::vector<Criterion> run_criteria() {
  return {
      {8, "determinism", determinism},
      {9, "learning (DCQN)", learning_dcqn},
      {10, "learning (DTQN)", learning_dtqn},
  };
}

}  // namespace qforge::acceptance
