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

#include "qforge/metrics.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace qforge {

std::string format_number(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string metrics_row(const EpisodeRecord& r, bool timing) {
  std::string row = std::to_string(r.episode);
  auto field = [&row](const std::string& text) {
    row += ',';
    row += text;
  };
  field(format_number(r.total_reward));
  field(format_number(r.mean_loss));
  field(format_number(r.epsilon));
  field(std::to_string(r.steps));
  field(timing ? format_number(r.env_time_s) : std::string());
  field(timing ? format_number(r.step_time_ms) : std::string());
  field(r.eval_avg_reward ? format_number(*r.eval_avg_reward) : std::string());
  field(loss_kind_name(r.loss_mode));
  return row;
}

MetricsSink::MetricsSink(const std::filesystem::path& dir, bool timing)
    : timing_(timing),
      metrics_(dir / "metrics.csv", std::ios::trunc),
      timings_(dir / "timing.csv", std::ios::trunc) {
  if (!metrics_ || !timings_)
    throw std::runtime_error("metrics: cannot write to " + dir.string());
  metrics_ << kMetricsHeader << '\n' << std::flush;
  timings_ << kTimingHeader << '\n' << std::flush;
}

void MetricsSink::write(const EpisodeRecord& r) {
  metrics_ << metrics_row(r, timing_) << '\n' << std::flush;
  timings_ << r.episode << ',' << format_number(r.env_time_s) << ','
           << format_number(r.step_time_ms) << '\n'
           << std::flush;
}

}  // namespace qforge
