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

// Per-episode metrics as RFC 4180 CSV.
//
// Timing columns (env_time_s, step_time_ms) are left empty unless timing is
// enabled, so two runs with the same seed produce byte-identical files; the
// timings always go to a companion timing.csv.

#include <filesystem>
#include <fstream>
#include <string>

#include "qforge/agent.hpp"

namespace qforge {

inline constexpr const char* kMetricsHeader =
    "episode,total_reward,mean_loss,epsilon,steps,env_time_s,step_time_ms,eval_avg_reward,"
    "loss_mode";
inline constexpr const char* kTimingHeader = "episode,env_time_s,step_time_ms";

// Shortest decimal text that parses back to the same double; empty for NaN.
std::string format_number(double v);

std::string metrics_row(const EpisodeRecord& r, bool timing);

class MetricsSink {
 public:
  // Creates (truncates) <dir>/metrics.csv and <dir>/timing.csv.
  MetricsSink(const std::filesystem::path& dir, bool timing);

  void write(const EpisodeRecord& r);

 private:
  bool timing_;
  std::ofstream metrics_, timings_;
};

}  // namespace qforge
