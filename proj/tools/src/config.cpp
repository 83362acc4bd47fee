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

#include "unsc_cli/config.hpp"

#include <cmath>

#include "unsc/errors.hpp"
#include "unsc/rng.hpp"

namespace unsc::cli {

using nlohmann::json;

namespace {

std::vector<std::string> split_dots(const std::string& key) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    parts.push_back(key.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (const auto& p : parts)
    if (p.empty()) throw ValidationError("override: empty path segment in '" + key + "'");
  return parts;
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return obj.at(key).get<T>();
}

Activation activation_from(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "identity") return Activation::kIdentity;
  throw ValidationError("model: unknown activation '" + s + "'");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

void apply_override(json& doc, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ValidationError("override '" + assignment + "' is not key=value");
  const auto parts = split_dots(assignment.substr(0, eq));
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw ValidationError("override: '" + parts[i] + "' is not a section");
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object())
    throw ValidationError("override: cannot set '" + parts.back() + "' on a non-object");
  (*node)[parts.back()] = std::move(value);
}

RunConfig config_from_json(json doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ValidationError("config: top level must be an object");
  RunConfig cfg;
  try {
    cfg.name = get_or<std::string>(doc, "name", "run");
    cfg.work_dir = get_or<std::string>(doc, "work_dir", "runs/" + cfg.name);
    cfg.seed = get_or<std::uint64_t>(doc, "seed", 0);

    const json data = doc.value("data", json::object());
    cfg.data.source = get_or<std::string>(data, "source", "gaussian");
    cfg.data.preset = resolve(base_dir, get_or<std::string>(data, "preset", ""));
    cfg.data.csv = resolve(base_dir, get_or<std::string>(data, "csv", ""));
    cfg.data.idx_images = resolve(base_dir, get_or<std::string>(data, "idx_images", ""));
    cfg.data.idx_labels = resolve(base_dir, get_or<std::string>(data, "idx_labels", ""));
    cfg.data.num_classes = get_or<std::size_t>(data, "num_classes", 0);

    const json sp = doc.value("split", json::object());
    cfg.split.train = get_or<double>(sp, "train", 0.9);
    cfg.split.val = get_or<double>(sp, "val", 0.1);
    cfg.split.test = get_or<double>(sp, "test", 0.0);
    cfg.split.unlearn_classes = get_or<std::vector<int>>(sp, "unlearn_classes", {});
    cfg.split.seed = derive_seed(cfg.seed, "split");

    const json model = doc.value("model", json::object());
    cfg.input_shape = get_or<std::vector<std::size_t>>(model, "input_shape", {});
    for (const auto& l : model.value("layers", json::array())) {
      LayerConfig lc;
      lc.type = get_or<std::string>(l, "type", "dense");
      lc.out = l.at("out").get<std::size_t>();
      lc.kernel = get_or<std::size_t>(l, "kernel", 3);
      lc.stride = get_or<std::size_t>(l, "stride", 1);
      lc.activation = activation_from(get_or<std::string>(l, "activation", "relu"));
      if (lc.type != "dense" && lc.type != "conv")
        throw ValidationError("model: unknown layer type '" + lc.type + "'");
      cfg.layers.push_back(lc);
    }

    const json tr = doc.value("train", json::object());
    cfg.train.lr = get_or<double>(tr, "lr", cfg.train.lr);
    cfg.train.epochs = get_or<std::size_t>(tr, "epochs", cfg.train.epochs);
    cfg.train.batch_size = get_or<std::size_t>(tr, "batch_size", cfg.train.batch_size);
    cfg.train.milestones = get_or<std::vector<std::size_t>>(tr, "milestones", cfg.train.milestones);
    cfg.train.gamma = get_or<double>(tr, "gamma", cfg.train.gamma);
    cfg.train.weight_decay = get_or<double>(tr, "weight_decay", cfg.train.weight_decay);
    cfg.train.patience = get_or<std::size_t>(tr, "patience", cfg.train.patience);
    cfg.train.seed = derive_seed(cfg.seed, "train");

    const json sub = doc.value("subspace", json::object());
    cfg.samples_per_class = get_or<std::size_t>(sub, "samples_per_class", 256);
    const json eps = sub.value("epsilon", json(0.99));
    if (eps.is_array()) {
      cfg.epsilons = eps.get<std::vector<double>>();
    } else {
      cfg.epsilons.assign(cfg.layers.size(), eps.get<double>());
    }

    const json un = doc.value("unlearn", json::object());
    cfg.unlearn.unlearn_classes = cfg.split.unlearn_classes;
    cfg.unlearn.labeling = labeling_from_name(get_or<std::string>(un, "labeling", "pseudo"));
    cfg.unlearn.use_null_space = get_or<bool>(un, "null_space", true);
    cfg.unlearn.ascend = get_or<bool>(un, "ascend", false);
    cfg.unlearn.schedule.lr = get_or<double>(un, "lr", cfg.unlearn.schedule.lr);
    cfg.unlearn.schedule.epochs = get_or<std::size_t>(un, "epochs", cfg.unlearn.schedule.epochs);
    cfg.unlearn.schedule.batch_size =
        get_or<std::size_t>(un, "batch_size", cfg.unlearn.schedule.batch_size);
    cfg.unlearn.epsilons = cfg.epsilons;
    cfg.unlearn.seed = derive_seed(cfg.seed, "unlearn");

    cfg.mia_holdout_size = get_or<std::size_t>(doc.value("mia", json::object()), "holdout_size", 0);

    const json ct = doc.value("contour", json::object());
    cfg.contour_epsilon = get_or<double>(ct, "epsilon", 1.0);
    cfg.contour_steps = get_or<std::size_t>(ct, "steps", 11);
    cfg.contour_radius = get_or<double>(ct, "radius", 0.5);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }

  // Validation.
  if (cfg.layers.empty()) throw ValidationError("config: model.layers is empty");
  for (const auto& l : cfg.layers)
    if (l.out == 0) throw ValidationError("config: layer width must be positive");
  if (cfg.data.source == "gaussian") {
    if (cfg.data.preset.empty()) throw ValidationError("config: data.preset is required");
    if (!std::filesystem::exists(cfg.data.preset))
      throw ArtifactError("config: preset not found: " + cfg.data.preset.string());
  } else if (cfg.data.source == "csv") {
    if (!std::filesystem::exists(cfg.data.csv))
      throw ArtifactError("config: csv not found: " + cfg.data.csv.string());
  } else if (cfg.data.source == "idx") {
    if (!std::filesystem::exists(cfg.data.idx_images) ||
        !std::filesystem::exists(cfg.data.idx_labels))
      throw ArtifactError("config: idx files not found");
  } else {
    throw ValidationError("config: unknown data.source '" + cfg.data.source + "'");
  }
  if (cfg.split.unlearn_classes.empty())
    throw ValidationError("config: split.unlearn_classes is empty");
  cfg.train.validate();
  validate_epsilons(cfg.epsilons, cfg.layers.size());
  if (!(cfg.contour_epsilon > 0.0 && cfg.contour_epsilon <= 1.0))
    throw ValidationError("config: contour.epsilon outside (0, 1]");
  if (cfg.contour_steps < 2) throw ValidationError("config: contour.steps must be >= 2");
  if (!(cfg.contour_radius > 0.0) || !std::isfinite(cfg.contour_radius))
    throw ValidationError("config: contour.radius must be positive");
  if (cfg.samples_per_class == 0)
    throw ValidationError("config: subspace.samples_per_class must be positive");
  if (cfg.unlearn.schedule.epochs == 0 || !(cfg.unlearn.schedule.lr > 0.0))
    throw ValidationError("config: unlearn schedule must be positive");
  if (cfg.unlearn.ascend != (cfg.unlearn.labeling == Labeling::kKeep))
    throw ValidationError("config: ascend requires labeling=keep and vice versa");

  // The work directory does not change results, so it stays out of the hash.
  json hashed = doc;
  hashed.erase("work_dir");
  cfg.effective = hashed;
  cfg.hash = hex64(fnv1a64(hashed.dump()));
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  if (!std::filesystem::exists(path)) throw ArtifactError("config not found: " + path.string());
  json doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) throw ValidationError("config: " + path.string() + " is not valid JSON");
  for (const auto& o : overrides) apply_override(doc, o);
  return config_from_json(std::move(doc), path.parent_path());
}

std::vector<LayerSpec> build_specs(const RunConfig& cfg, std::size_t input_dim,
                                   std::size_t num_classes) {
  std::vector<LayerSpec> specs;
  std::size_t width = input_dim;
  std::size_t channels = 0, height = 0, cols = 0;
  if (!cfg.input_shape.empty()) {
    if (cfg.input_shape.size() != 3)
      throw ValidationError("model.input_shape must be [channels, height, width]");
    channels = cfg.input_shape[0];
    height = cfg.input_shape[1];
    cols = cfg.input_shape[2];
    if (channels * height * cols != input_dim)
      throw ValidationError("model.input_shape does not match the data dimension");
  }
  for (const auto& l : cfg.layers) {
    if (l.type == "conv") {
      if (channels == 0) throw ValidationError("model: conv layer needs a known input shape");
      LayerSpec s = LayerSpec::conv(channels, l.out, l.kernel, l.stride, height, cols, l.activation);
      s.validate();
      channels = l.out;
      height = s.out_height();
      cols = s.out_width();
      width = s.output_dim();
      specs.push_back(s);
    } else {
      specs.push_back(LayerSpec::dense(width, l.out, l.activation));
      width = l.out;
      channels = height = cols = 0;
    }
  }
  if (width != num_classes)
    throw ValidationError("model: last layer emits " + std::to_string(width) +
                          " values, expected " + std::to_string(num_classes));
  return specs;
}

}  // namespace unsc::cli
