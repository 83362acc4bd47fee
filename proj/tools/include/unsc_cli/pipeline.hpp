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

#ifndef UNSC_CLI_PIPELINE_HPP_
#define UNSC_CLI_PIPELINE_HPP_

#include <string>
#include <vector>

#include "unsc/data.hpp"
#include "unsc/eval.hpp"
#include "unsc/nn.hpp"
#include "unsc/subspace.hpp"
#include "unsc/unlearn.hpp"
#include "unsc_cli/config.hpp"

namespace unsc::cli {

// Every subset a run needs, materialized once.
struct Views {
  Split split;
  Dataset all, train, val, d_u, d_r;
  Dataset test_remaining, test_unlearn, val_remaining;
  std::string data_hash;
};

// Generates (gaussian) or loads (csv, idx) the configured dataset.
Dataset load_source(const RunConfig& cfg);

Views make_views(Dataset ds, const RunConfig& cfg);

std::vector<LayerSpec> run_specs(const RunConfig& cfg, const Dataset& ds);

Network train_original(const RunConfig& cfg, const Views& v, TrainLog* log = nullptr);
Network train_retrain(const RunConfig& cfg, const Views& v);

// Indices into v.train of the subspace build batch for class c.
std::vector<std::size_t> build_indices(const RunConfig& cfg, const Views& v, int c);

std::vector<ClassSubspace> build_subspaces(const RunConfig& cfg, const Network& net,
                                           const Views& v);

// The build batches of every class outside the unlearn set, concatenated.
Dataset remaining_build_set(const RunConfig& cfg, const Views& v);

enum class Method { kUnsc, kRandomLabel, kRandomLabelNullSpace, kGradientAscent, kConfigured };

std::string method_name(Method m);
UnlearnPlan plan_for(const RunConfig& cfg, Method m);

// Runs the method; projectors may be null when the plan does not use them.
Network run_method(const RunConfig& cfg, Method m, const Network& net_o, const Views& v,
                   const ProjectorCache* projectors, UnlearnLog* log = nullptr);

MiaReport run_mia(const RunConfig& cfg, const Network& net, const Views& v);

struct AblationRow {
  std::string name;
  double acc_remaining_test = 0.0;
  double acc_unlearn_test = 0.0;
  double acc_mia = 0.0;
};

// Original, Retrain, RL, RL + null space, UNSC. The three unlearning cells run
// on separate threads; each owns its network copy.
std::vector<AblationRow> ablate(const RunConfig& cfg, const Views& v, const Network& net_o,
                                const Network& net_r, const ProjectorCache& projectors);

}  // namespace unsc::cli

#endif  // UNSC_CLI_PIPELINE_HPP_
