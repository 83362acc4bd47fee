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

#ifndef UNSC_CLI_CONFIG_HPP_
#define UNSC_CLI_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "unsc/data.hpp"
#include "unsc/nn.hpp"
#include "unsc/unlearn.hpp"

namespace unsc::cli {

struct LayerConfig {
  std::string type = "dense";  // dense | conv
  std::size_t out = 0;         // units or output channels
  std::size_t kernel = 3;
  std::size_t stride = 1;
  Activation activation = Activation::kRelu;
};

struct DataConfig {
  std::string source = "gaussian";  // gaussian | csv | idx
  std::filesystem::path preset;     // gaussian
  std::filesystem::path csv;        // csv
  std::filesystem::path idx_images, idx_labels;
  std::size_t num_classes = 0;  // 0 = infer (csv) / 10 (idx)
};

struct RunConfig {
  std::string name = "run";
  std::filesystem::path work_dir = "runs/default";
  std::uint64_t seed = 0;
  DataConfig data;
  SplitSpec split;
  // Optional [channels, height, width] when the first layer is conv.
  std::vector<std::size_t> input_shape;
  std::vector<LayerConfig> layers;
  TrainSchedule train;
  std::size_t samples_per_class = 256;
  std::vector<double> epsilons;  // one per layer after expansion
  UnlearnPlan unlearn;           // seed and epsilons filled from the run
  std::size_t mia_holdout_size = 0;  // 0 = use everything available
  double contour_epsilon = 1.0;
  std::size_t contour_steps = 11;
  double contour_radius = 0.5;

  // Canonical JSON of the effective config and its FNV-1a digest.
  nlohmann::json effective;
  std::string hash;

  std::filesystem::path path(const std::string& rel) const { return work_dir / rel; }
};

// Applies one `dotted.key=value` override. The value is parsed as JSON when
// possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Parses, validates and resolves relative data paths against base_dir.
RunConfig config_from_json(nlohmann::json doc, const std::filesystem::path& base_dir);

RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {});

// Layer specs for a given per-sample input width.
std::vector<LayerSpec> build_specs(const RunConfig& cfg, std::size_t input_dim,
                                   std::size_t num_classes);

}  // namespace unsc::cli

#endif  // UNSC_CLI_CONFIG_HPP_
