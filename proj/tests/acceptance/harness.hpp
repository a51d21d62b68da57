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

#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "qforge/nn/module.hpp"

namespace qforge::acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

std::vector<Criterion> property_criteria();
std::vector<Criterion> run_criteria();

inline std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

inline Tensor state_tensor(const nn::Module& m, const std::string& name) {
  for (const auto& t : m.state())
    if (t.name == name) return t.tensor;
  throw std::runtime_error("no tensor named " + name);
}

inline void fill_tensor(const nn::Module& m, const std::string& name, double value) {
  for (double& v : state_tensor(m, name).mutable_values()) v = value;
}

// Folds a list of checks into one outcome; the first failure wins the detail.
class Verdict {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && pass_) {
      pass_ = false;
      failure_ = what;
    }
  }
  Outcome finish(const std::string& summary) const {
    return {pass_, pass_ ? summary : failure_ + "; " + summary};
  }
  bool pass() const { return pass_; }

 private:
  bool pass_ = true;
  std::string failure_;
};

}  // namespace qforge::acceptance
