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

// Row kernels for the dense desirability solve.
//
// Every kernel has a scalar reference in `retro::simd::scalar`. Vector
// variants live in their own translation units (compiled with the matching
// -m flags) and are entered only after a runtime CPU check. The dispatching
// entry points below pick the best available ISA once; tests can pin an ISA
// with `force_isa`.
//
// Vector variants reassociate sums, so they agree with the scalar reference
// to rounding (not bit-exactly).

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace retro::simd {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view isa_name(Isa isa);

// True when the kernels for `isa` are compiled in and the CPU supports them.
bool isa_available(Isa isa);

// ISA used by the dispatching kernels.
Isa active_isa();

// Pins the dispatching kernels to `isa`. Throws std::invalid_argument when
// the ISA is not available on this machine.
void force_isa(Isa isa);

// Back to automatic selection (RETRO_SIMD env var, else best available).
void reset_isa();

double dot(std::span<const double> a, std::span<const double> b);

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
}  // namespace scalar

#if defined(RETRO_HAVE_AVX2_TU)
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
}  // namespace avx2
#endif

#if defined(RETRO_HAVE_NEON_TU)
namespace neon {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
}  // namespace neon
#endif

}  // namespace retro::simd
