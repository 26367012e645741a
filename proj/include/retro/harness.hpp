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

// Command-line front end:
//
//   retro run            [--config PATH] [--seed U64] [--out DIR]
//                        [--format csv|json] [--replay PATH]
//   retro benchmark      ...
//   retro sweep-horizon  ...
//   retro check-bounds   ...
//
// The output directory is --out, else $RETRO_OUT_DIR, else output.dir from
// the config. Exit codes: 0 success, 1 invalid input, 2 runtime failure.

#pragma once

#include <iosfwd>
#include <string>

namespace retro {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitRuntime = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace retro
