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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_internal.hpp"

namespace qforge::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(QFORGE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& best_available() {
  if (const char* env = std::getenv("QFORGE_KERNELS")) {
    const std::string want(env);
    if (want == "scalar") return scalar_table();
    if (want == "avx2" && avx2_table()) return *avx2_table();
    if (want == "neon" && neon_table()) return *neon_table();
  }
  if (const KernelTable* t = avx2_table()) return *t;
  if (const KernelTable* t = neon_table()) return *t;
  return scalar_table();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{&best_available()};
  return slot;
}

}  // namespace

const KernelTable* avx2_table() {
#if defined(QFORGE_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_table() {
#if defined(QFORGE_HAVE_NEON)
  return &neon_table_unchecked();
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

void select(Isa isa) {
  const KernelTable* table = nullptr;
  switch (isa) {
    case Isa::kScalar: table = &scalar_table(); break;
    case Isa::kAvx2: table = avx2_table(); break;
    case Isa::kNeon: table = neon_table(); break;
  }
  if (table == nullptr)
    throw std::invalid_argument("kernel variant '" + std::string(isa_name(isa)) +
                                "' is not available on this machine");
  active_slot().store(table, std::memory_order_release);
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

}  // namespace qforge::kernels
