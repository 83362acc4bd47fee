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

#ifndef UNSC_UNLEARN_HPP_
#define UNSC_UNLEARN_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "unsc/data.hpp"
#include "unsc/nn.hpp"
#include "unsc/subspace.hpp"

namespace unsc {

// How unlearning samples are labeled during finetuning.
//   kPseudo  best non-unlearned class under the original model
//   kRandom  uniform over the other classes, drawn once per sample
//   kKeep    original label (only meaningful with gradient ascent)
enum class Labeling { kPseudo, kRandom, kKeep };

std::string labeling_name(Labeling l);
Labeling labeling_from_name(const std::string& name);

struct UnlearnSchedule {
  double lr = 0.04;
  std::size_t epochs = 25;
  std::size_t batch_size = 64;
};

struct UnlearnPlan {
  std::vector<int> unlearn_classes;
  Labeling labeling = Labeling::kPseudo;
  bool use_null_space = true;
  bool ascend = false;
  UnlearnSchedule schedule;
  std::vector<double> epsilons;
  std::uint64_t seed = 0;

  // Checks the class set against K and the labeling/ascend combination.
  void validate(std::size_t num_classes) const;
};

struct PseudoLabeledSample {
  std::size_t index = 0;  // row in the unlearning set
  int original = 0;
  int assigned = 0;
};

// Argmax of probs over classes outside `unlearn_classes`, lowest index on
// ties. `y` must be one of the unlearn classes.
int pseudo_label_from_probs(std::span<const double> probs, int y,
                            std::span<const int> unlearn_classes);

int pseudo_label(const Network& net_o, std::span<const double> sample, int y,
                 std::span<const int> unlearn_classes);

std::vector<PseudoLabeledSample> pseudo_label_all(const Network& net_o, const Dataset& d_u,
                                                  std::span<const int> unlearn_classes);

// Uniform over [0, K) \ {y}, one draw per sample in order.
std::vector<PseudoLabeledSample> random_labels(const Dataset& d_u, std::uint64_t seed);

struct UnlearnLog {
  std::vector<double> epoch_loss;
  // Fraction of d_u still predicted as its original class after each epoch.
  std::vector<double> unlearn_train_accuracy;
  std::vector<PseudoLabeledSample> labels;
};

// Finetunes net_o on d_u under the plan. Minibatches are grouped by original
// class c; with use_null_space every layer gradient G is replaced by G P,
// where P comes from projectors.get(c). The batch order is shuffled per
// epoch from plan.seed.
Network run_unlearn(const Network& net_o, const Dataset& d_u, const UnlearnPlan& plan,
                    const ProjectorCache* projectors, UnlearnLog* log = nullptr);

// Pseudo-labels plus null-space projected SGD.
Network unsc_unlearn(const Network& net_o, const Dataset& d_u, const ProjectorCache& projectors,
                     const UnlearnSchedule& schedule, std::span<const int> unlearn_classes,
                     std::uint64_t seed, UnlearnLog* log = nullptr);

// Random labels or gradient ascent, with or without the projection.
Network baseline_unlearn(const Network& net_o, const Dataset& d_u, const UnlearnPlan& plan,
                         const ProjectorCache* projectors = nullptr, UnlearnLog* log = nullptr);

// Fresh Glorot initialization from init_seed, then train() on d_r.
Network retrain_oracle(const std::vector<LayerSpec>& specs, std::size_t num_classes,
                       const Dataset& d_r, const Dataset& val, const TrainSchedule& schedule,
                       std::uint64_t init_seed);

}  // namespace unsc

#endif  // UNSC_UNLEARN_HPP_
