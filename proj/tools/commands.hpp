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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qforge/config.hpp"

namespace qforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCheckpoint = 3;

struct CommonOptions {
  std::string preset;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> episodes;
  std::vector<std::string> sets;

  bool has_run_config() const { return !preset.empty() || !config.empty() || !sets.empty(); }
  RunConfigSources sources() const;
  // --out, then $QFORGE_OUT, then runs/<preset or config name>-seed<seed>.
  std::filesystem::path output_dir(const RunConfig& rc) const;
};

struct TrainOptions {
  CommonOptions common;
  bool timing = false;
  std::optional<double> stop_at;
  bool quiet = false;
};

struct EvalOptions {
  CommonOptions common;
  std::string checkpoint;
  std::string env;
  std::size_t episodes = 5;
  std::uint64_t seed = 42;
};

struct BenchOptions {
  CommonOptions common;
  std::size_t batch = 32;
  std::size_t iterations = 100;
  std::size_t warmup = 10;
  std::vector<std::string> variants;
};

struct GradCheckOptions {
  std::vector<std::string> variants;
  double tolerance = 1e-4;
  double step = 1e-5;
  std::uint64_t seed = 0;
};

int run_train(const TrainOptions& o);
int run_eval(const EvalOptions& o);
int run_bench(const BenchOptions& o);
int run_grad_check(const GradCheckOptions& o);

}  // namespace qforge::cli
