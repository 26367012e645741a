// Copyright 2026 The retro Authors
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

#include "retro/simd.hpp"

namespace retro::simd {

namespace {

using DotFn = double (*)(std::span<const double>, std::span<const double>);
using AxpyFn = void (*)(double, std::span<const double>, std::span<double>);

struct KernelTable {
  Isa isa;
  DotFn dot;
  AxpyFn axpy;
};

KernelTable table_for(Isa isa) {
  switch (isa) {
#if defined(RETRO_HAVE_AVX2_TU)
    case Isa::kAvx2:
      return {Isa::kAvx2, &avx2::dot, &avx2::axpy};
#endif
#if defined(RETRO_HAVE_NEON_TU)
    case Isa::kNeon:
      return {Isa::kNeon, &neon::dot, &neon::axpy};
#endif
    default:
      return {Isa::kScalar, &scalar::dot, &scalar::axpy};
  }
}

Isa detect_best() {
  if (const char* env = std::getenv("RETRO_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Isa::kScalar;
    if (want == "avx2" && isa_available(Isa::kAvx2)) return Isa::kAvx2;
    if (want == "neon" && isa_available(Isa::kNeon)) return Isa::kNeon;
  }
  if (isa_available(Isa::kAvx2)) return Isa::kAvx2;
  if (isa_available(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

std::atomic<const KernelTable*> g_table{nullptr};

const KernelTable& table() {
  const KernelTable* t = g_table.load(std::memory_order_acquire);
  if (t == nullptr) {
    static const KernelTable automatic = table_for(detect_best());
    g_table.store(&automatic, std::memory_order_release);
    t = &automatic;
  }
  return *t;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
    default:
      return "scalar";
  }
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(RETRO_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(RETRO_HAVE_NEON_TU)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return table().isa; }

void force_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw std::invalid_argument("SIMD ISA not available: " +
                                std::string(isa_name(isa)));
  }
  static const KernelTable scalar_table = table_for(Isa::kScalar);
  static const KernelTable avx2_table = table_for(Isa::kAvx2);
  static const KernelTable neon_table = table_for(Isa::kNeon);
  const KernelTable* t = &scalar_table;
  if (isa == Isa::kAvx2) t = &avx2_table;
  if (isa == Isa::kNeon) t = &neon_table;
  g_table.store(t, std::memory_order_release);
}

void reset_isa() { g_table.store(nullptr, std::memory_order_release); }

double dot(std::span<const double> a, std::span<const double> b) {
  return table().dot(a, b);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  table().axpy(alpha, x, y);
}

}  // namespace retro::simd
