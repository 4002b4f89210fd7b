// SPDX-FileCopyrightText: Copyright (c) 2026 The sddi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <exception>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sddi/config.hpp"
#include "sddi/eval.hpp"
#include "sddi/pubchem.hpp"

namespace sddi {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitFormat = 4;
inline constexpr int kExitNumeric = 5;

int exit_code_for(const std::exception& error);

//! Injection points for the command layer.
struct CliEnv {
  std::function<std::unique_ptr<HttpTransport>()> make_transport;  // libcurl when empty
  Clock* clock = nullptr;                                          // steady clock when null
  FetchOptions fetch_options;                                      // image_size is filled from the config
  std::ostream* out = &std::cout;
  std::ostream* err = &std::cerr;
};

using Overrides = std::vector<std::pair<std::string, std::string>>;

void cmd_fetch(const RunConfig& config, CliEnv& env);
void cmd_build_pairs(const RunConfig& config, CliEnv& env);
void cmd_train(const RunConfig& config, CliEnv& env);
//! Model-shape keys come from the checkpoint; `overrides` may change
//! everything else.
EvalReport cmd_eval(const std::filesystem::path& checkpoint, const Overrides& overrides, CliEnv& env);
void cmd_predict(const std::filesystem::path& checkpoint, const std::filesystem::path& image_a,
                 const std::filesystem::path& image_b, const Overrides& overrides, CliEnv& env);
EvalReport cmd_baseline(const RunConfig& config, CliEnv& env);

//! Parses argv (without the program name), runs the subcommand, and maps
//! exceptions to exit codes with a single `error: <reason>` line on err.
int run_cli(const std::vector<std::string>& args, CliEnv& env);

}  // namespace sddi
