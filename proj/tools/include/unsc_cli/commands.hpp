// Copyright 2026 The nullspace-unlearn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UNSC_CLI_COMMANDS_HPP_
#define UNSC_CLI_COMMANDS_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "unsc_cli/config.hpp"

namespace unsc::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kMissingArtifact = 2,
  kInvalid = 3,
  kNumeric = 4,
};

// Artifact file names inside the work directory.
inline constexpr const char* kDatasetCsv = "dataset.csv";
inline constexpr const char* kDatasetMeta = "dataset.json";
inline constexpr const char* kOriginalCkpt = "original.ckpt.json";
inline constexpr const char* kRetrainCkpt = "retrain.ckpt.json";
inline constexpr const char* kUnlearnedCkpt = "unlearned.ckpt.json";
inline constexpr const char* kUnlearnManifest = "unlearn_manifest.json";

void cmd_gen_data(const RunConfig& cfg, std::ostream& out);
void cmd_train(const RunConfig& cfg, std::ostream& out);
void cmd_retrain(const RunConfig& cfg, std::ostream& out);
void cmd_subspace(const RunConfig& cfg, std::ostream& out);
void cmd_unlearn(const RunConfig& cfg, std::ostream& out);
// model: original | retrain | unlearned
void cmd_evaluate(const RunConfig& cfg, const std::string& model, std::ostream& out);
void cmd_contour(const RunConfig& cfg, std::ostream& out);
void cmd_ablate(const RunConfig& cfg, std::ostream& out);
void cmd_report(const RunConfig& cfg, std::ostream& out);

// Parses argv, runs one subcommand and maps failures to exit codes. Errors
// are written to err as a single JSON line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace unsc::cli

#endif  // UNSC_CLI_COMMANDS_HPP_
