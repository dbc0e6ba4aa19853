/*
 * Copyright 2026 The texnerf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace texnerf::cli {

/// Exit statuses of `run`.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Parses argv and dispatches one subcommand
/// (synth, decompose, map, train, render, eval, pointcloud).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Names of the built-in presets accepted by --config.
std::vector<std::string> preset_names();

/// Fully resolved configuration (defaults, preset or file, overrides) as JSON
/// text, without running anything. Throws texnerf::Error on bad input.
std::string resolve_config(const std::string& command, const std::string& config,
                           const std::vector<std::string>& overrides, long long seed = -1);

}  // namespace texnerf::cli
