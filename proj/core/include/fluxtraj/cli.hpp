/*
 * Copyright 2026 The fluxtraj Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <string>
#include <vector>

namespace fluxtraj::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitSolverFailure = 3;
inline constexpr int kExitEvaluationError = 4;

/// Batch front-end. Commands:
///   optimize <cfg>                       solve and write pulse/trajectory/diagnostics
///   evaluate <cfg> [--pulse <csv>]       score a pulse, write report.json/report.csv
///   sweep <cfg> --param <p> --values <v> fan out runs over a config field
///   noise-gen <cfg>                      write a 1/f flux-noise sequence
///   audit <cfg>                          print the problem audit listing
/// `--out <dir>` overrides the config's output directory; the environment
/// variable FLUXTRAJ_OUT_ROOT anchors relative output paths. Every run
/// writes the fully-resolved config next to its outputs.
int run(const std::vector<std::string>& args);

}  // namespace fluxtraj::cli
