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

// Test entry point. Every desirability solution produced anywhere in the
// suite is checked against the normalization bound max_t g_t <= N exp(-dV_m)
// and for finiteness.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <string>

#include <gtest/gtest.h>

#include "retro/adjust.hpp"

namespace {

class NormalizationBoundEnvironment : public ::testing::Environment {
 public:
  void SetUp() override {
    retro::set_solution_observer([this](const retro::DesirabilitySolution& s) {
      check(s);
    });
  }

  void TearDown() override {
    retro::set_solution_observer(nullptr);
    EXPECT_EQ(violations_.load(), 0u) << "first violation: " << first_;
  }

 private:
  void check(const retro::DesirabilitySolution& s) {
    if (s.size() == 0) return;
    double max_z = 0.0;
    double max_g = -INFINITY;
    bool finite = true;
    for (int i = 0; i < s.size(); ++i) {
      max_z = std::max(max_z, s.z[i]);
      max_g = std::max(max_g, s.g[i]);
      finite = finite && std::isfinite(s.z[i]) && std::isfinite(s.g[i]);
    }
    const double bound = s.size() * max_z;
    if (!finite || max_g > bound * (1.0 + 1e-12) + 1e-300) {
      std::lock_guard<std::mutex> lock(mu_);
      if (violations_++ == 0) {
        first_ = "window " + std::to_string(s.first) + ".." +
                 std::to_string(s.last()) + " max g " + std::to_string(max_g) +
                 " bound " + std::to_string(bound);
      }
    }
  }

  std::atomic<unsigned> violations_{0};
  std::mutex mu_;
  std::string first_;
};

}  // namespace

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  ::testing::AddGlobalTestEnvironment(new NormalizationBoundEnvironment);
  return RUN_ALL_TESTS();
}
