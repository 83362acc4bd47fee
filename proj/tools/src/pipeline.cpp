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

#include "unsc_cli/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <thread>

#include "unsc/errors.hpp"
#include "unsc/rng.hpp"

namespace unsc::cli {

Dataset load_source(const RunConfig& cfg) {
  const auto& d = cfg.data;
  if (d.source == "gaussian")
    return gaussian_mixture(load_mixture_preset(d.preset), derive_seed(cfg.seed, "data"));
  if (d.source == "csv") return load_csv(d.csv, d.num_classes);
  return load_idx(d.idx_images, d.idx_labels, d.num_classes == 0 ? 10 : d.num_classes);
}

Views make_views(Dataset ds, const RunConfig& cfg) {
  Views v;
  v.split = split(ds, cfg.split);
  v.train = ds.subset(v.split.train);
  v.val = ds.subset(v.split.val);
  v.d_u = ds.subset(v.split.d_u);
  v.d_r = ds.subset(v.split.d_r);
  v.test_remaining = ds.subset(v.split.test_remaining);
  v.test_unlearn = ds.subset(v.split.test_unlearn);
  v.val_remaining = ds.subset(v.split.val_remaining);
  v.data_hash = dataset_hash(ds);
  v.all = std::move(ds);
  return v;
}

std::vector<LayerSpec> run_specs(const RunConfig& cfg, const Dataset& ds) {
  return build_specs(cfg, ds.dim(), ds.num_classes);
}

Network train_original(const RunConfig& cfg, const Views& v, TrainLog* log) {
  const auto specs = run_specs(cfg, v.all);
  return train(Network::initialize(specs, v.all.num_classes, derive_seed(cfg.seed, "init")),
               v.train, v.val, cfg.train, log);
}

Network train_retrain(const RunConfig& cfg, const Views& v) {
  TrainSchedule s = cfg.train;
  s.seed = derive_seed(cfg.seed, "retrain");
  return retrain_oracle(run_specs(cfg, v.all), v.all.num_classes, v.d_r, v.val_remaining, s,
                        derive_seed(cfg.seed, "retrain-init"));
}

std::vector<std::size_t> build_indices(const RunConfig& cfg, const Views& v, int c) {
  const int cls[] = {c};
  auto idx = v.train.indices_of(cls);
  Rng rng(derive_seed(cfg.seed, "subspace/" + std::to_string(c)));
  rng.shuffle(idx);
  if (idx.size() > cfg.samples_per_class) idx.resize(cfg.samples_per_class);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<ClassSubspace> build_subspaces(const RunConfig& cfg, const Network& net,
                                           const Views& v) {
  std::vector<ClassSubspace> out;
  for (std::size_t c = 0; c < v.all.num_classes; ++c) {
    const auto idx = build_indices(cfg, v, static_cast<int>(c));
    if (idx.empty()) continue;
    const std::vector<int> labels(idx.size(), static_cast<int>(c));
    out.push_back(class_subspace(net, v.train.columns(idx), labels, cfg.epsilons));
  }
  return out;
}

Dataset remaining_build_set(const RunConfig& cfg, const Views& v) {
  std::vector<std::size_t> all;
  const auto& u = cfg.split.unlearn_classes;
  for (std::size_t c = 0; c < v.all.num_classes; ++c) {
    if (std::find(u.begin(), u.end(), static_cast<int>(c)) != u.end()) continue;
    const auto idx = build_indices(cfg, v, static_cast<int>(c));
    all.insert(all.end(), idx.begin(), idx.end());
  }
  std::sort(all.begin(), all.end());
  return v.train.subset(all);
}

std::string method_name(Method m) {
  switch (m) {
    case Method::kUnsc:
      return "UNSC";
    case Method::kRandomLabel:
      return "RL";
    case Method::kRandomLabelNullSpace:
      return "RL+NullSpace";
    case Method::kGradientAscent:
      return "GA";
    case Method::kConfigured:
      return "configured";
  }
  return "configured";
}

UnlearnPlan plan_for(const RunConfig& cfg, Method m) {
  UnlearnPlan p = cfg.unlearn;
  switch (m) {
    case Method::kUnsc:
      p.labeling = Labeling::kPseudo;
      p.use_null_space = true;
      p.ascend = false;
      break;
    case Method::kRandomLabel:
      p.labeling = Labeling::kRandom;
      p.use_null_space = false;
      p.ascend = false;
      break;
    case Method::kRandomLabelNullSpace:
      p.labeling = Labeling::kRandom;
      p.use_null_space = true;
      p.ascend = false;
      break;
    case Method::kGradientAscent:
      p.labeling = Labeling::kKeep;
      p.use_null_space = false;
      p.ascend = true;
      break;
    case Method::kConfigured:
      break;
  }
  return p;
}

Network run_method(const RunConfig& cfg, Method m, const Network& net_o, const Views& v,
                   const ProjectorCache* projectors, UnlearnLog* log) {
  return run_unlearn(net_o, v.d_u, plan_for(cfg, m), projectors, log);
}

MiaReport run_mia(const RunConfig& cfg, const Network& net, const Views& v) {
  if (cfg.mia_holdout_size == 0) return mia(net, v.d_u, v.d_r, v.test_remaining);
  auto head = [&](const Dataset& ds) {
    std::vector<std::size_t> idx(std::min(ds.size(), cfg.mia_holdout_size));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return ds.subset(idx);
  };
  return mia(net, v.d_u, head(v.d_r), head(v.test_remaining));
}

std::vector<AblationRow> ablate(const RunConfig& cfg, const Views& v, const Network& net_o,
                                const Network& net_r, const ProjectorCache& projectors) {
  auto row = [&](const std::string& name, const Network& net) {
    const UtilityReport u = utility(net, v.test_remaining, v.test_unlearn);
    return AblationRow{name, u.acc_remaining_test, u.acc_unlearn_test.value_or(0.0),
                       run_mia(cfg, net, v).acc_mia};
  };
  const Method cells[] = {Method::kRandomLabel, Method::kRandomLabelNullSpace, Method::kUnsc};
  constexpr std::size_t kCells = std::size(cells);
  std::vector<Network> nets(kCells);
  std::vector<std::exception_ptr> errors(kCells);
  std::vector<std::thread> workers;
  for (std::size_t i = 0; i < kCells; ++i) {
    workers.emplace_back([&, i] {
      try {
        nets[i] = run_method(cfg, cells[i], net_o, v, &projectors);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<AblationRow> rows;
  rows.push_back(row("Original", net_o));
  rows.push_back(row("Retrain", net_r));
  for (std::size_t i = 0; i < kCells; ++i) rows.push_back(row(method_name(cells[i]), nets[i]));
  return rows;
}

}  // namespace unsc::cli
