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

#include <ostream>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "retro/simd.hpp"

namespace retro::simd {

void PrintTo(Isa isa, std::ostream* os) { *os << isa_name(isa); }

namespace {

std::vector<double> random_vector(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// Plain long-double loop, independent of every kernel.
long double reference_dot(const std::vector<double>& a,
                          const std::vector<double>& b) {
  long double s = 0.0L;
  for (size_t i = 0; i < a.size(); ++i) s += (long double)a[i] * b[i];
  return s;
}

class KernelTest : public ::testing::TestWithParam<Isa> {
 protected:
  void SetUp() override {
    if (!isa_available(GetParam())) GTEST_SKIP() << "ISA not available";
    force_isa(GetParam());
  }
  void TearDown() override { reset_isa(); }
};

TEST_P(KernelTest, DotMatchesReferenceOnAllTailLengths) {
  std::mt19937_64 rng(11);
  for (int n = 0; n <= 67; ++n) {
    const auto a = random_vector(n, rng);
    const auto b = random_vector(n, rng);
    const long double ref = reference_dot(a, b);
    EXPECT_NEAR(dot(a, b), (double)ref, 1e-14 * (n + 1)) << "n=" << n;
  }
}

TEST_P(KernelTest, AxpyMatchesScalar) {
  std::mt19937_64 rng(12);
  for (int n : {0, 1, 3, 4, 5, 8, 15, 16, 33, 257}) {
    const auto x = random_vector(n, rng);
    auto y = random_vector(n, rng);
    auto y_ref = y;
    axpy(-0.37, x, y);
    scalar::axpy(-0.37, x, y_ref);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(y[i], y_ref[i], 1e-15) << i;
  }
}

TEST_P(KernelTest, ForcedIsaIsActive) { EXPECT_EQ(active_isa(), GetParam()); }

INSTANTIATE_TEST_SUITE_P(Isas, KernelTest,
                         ::testing::Values(Isa::kScalar, Isa::kAvx2, Isa::kNeon),
                         [](const auto& info) {
                           return std::string(isa_name(info.param));
                         });

TEST(Simd, ScalarAlwaysAvailable) {
  EXPECT_TRUE(isa_available(Isa::kScalar));
  EXPECT_EQ(isa_name(Isa::kScalar), "scalar");
}

}  // namespace
}  // namespace retro::simd
