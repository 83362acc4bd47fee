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

#include "unsc/unlearn.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "unsc/errors.hpp"
#include "unsc/rng.hpp"

namespace unsc {

std::string labeling_name(Labeling l) {
  switch (l) {
    case Labeling::kPseudo:
      return "pseudo";
    case Labeling::kRandom:
      return "random";
    case Labeling::kKeep:
      return "keep";
  }
  return "pseudo";
}

Labeling labeling_from_name(const std::string& name) {
  if (name == "pseudo") return Labeling::kPseudo;
  if (name == "random") return Labeling::kRandom;
  if (name == "keep") return Labeling::kKeep;
  throw ValidationError("unknown labeling '" + name + "' (expected pseudo, random or keep)");
}

void UnlearnPlan::validate(std::size_t num_classes) const {
  if (unlearn_classes.empty()) throw ValidationError("plan: unlearn class set is empty");
  if (unlearn_classes.size() >= num_classes)
    throw ValidationError("plan: unlearn set must be a strict subset of the classes");
  for (int c : unlearn_classes)
    if (c < 0 || static_cast<std::size_t>(c) >= num_classes)
      throw ValidationError("plan: unlearn class " + std::to_string(c) + " out of range");
  if (ascend && labeling != Labeling::kKeep)
    throw ValidationError("plan: gradient ascent requires labeling=keep");
  if (!ascend && labeling == Labeling::kKeep)
    throw ValidationError("plan: labeling=keep without gradient ascent is not an unlearner");
  if (!(schedule.lr >= 0.0) || !std::isfinite(schedule.lr))
    throw ValidationError("plan: lr must be non-negative");
  if (schedule.batch_size == 0) throw ValidationError("plan: batch_size must be positive");
  for (double e : epsilons)
    if (!(e > 0.0 && e <= 1.0))
      throw ValidationError("plan: epsilon " + std::to_string(e) + " outside (0, 1]");
}

int pseudo_label_from_probs(std::span<const double> probs, int y,
                            std::span<const int> unlearn_classes) {
  auto excluded = [&](int c) {
    return std::find(unlearn_classes.begin(), unlearn_classes.end(), c) != unlearn_classes.end();
  };
  if (!excluded(y))
    throw ValidationError("pseudo_label: label " + std::to_string(y) + " is not being unlearned");
  int best = -1;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    const int ci = static_cast<int>(c);
    if (excluded(ci)) continue;
    if (best < 0 || probs[c] > probs[static_cast<std::size_t>(best)]) best = ci;
  }
  if (best < 0) throw ValidationError("pseudo_label: every class is being unlearned");
  return best;
}

int pseudo_label(const Network& net_o, std::span<const double> sample, int y,
                 std::span<const int> unlearn_classes) {
  const Matrix probs = softmax(forward(net_o, Matrix::column(sample)).logits);
  return pseudo_label_from_probs(probs.col(0), y, unlearn_classes);
}

std::vector<PseudoLabeledSample> pseudo_label_all(const Network& net_o, const Dataset& d_u,
                                                  std::span<const int> unlearn_classes) {
  std::vector<PseudoLabeledSample> out;
  if (d_u.size() == 0) return out;
  const Matrix probs = softmax(forward(net_o, d_u.columns()).logits);
  for (std::size_t i = 0; i < d_u.size(); ++i)
    out.push_back({i, d_u.labels[i],
                   pseudo_label_from_probs(probs.col(i), d_u.labels[i], unlearn_classes)});
  return out;
}

std::vector<PseudoLabeledSample> random_labels(const Dataset& d_u, std::uint64_t seed) {
  if (d_u.num_classes < 2) throw ValidationError("random_labels: need at least two classes");
  Rng rng(seed);
  std::vector<PseudoLabeledSample> out;
  for (std::size_t i = 0; i < d_u.size(); ++i) {
    int r = static_cast<int>(rng.uniform_index(d_u.num_classes - 1));
    if (r >= d_u.labels[i]) ++r;
    out.push_back({i, d_u.labels[i], r});
  }
  return out;
}

Network run_unlearn(const Network& net_o, const Dataset& d_u, const UnlearnPlan& plan,
                    const ProjectorCache* projectors, UnlearnLog* log) {
  plan.validate(net_o.num_classes());
  if (d_u.size() == 0) throw ValidationError("unlearn: empty unlearning set");
  for (int y : d_u.labels)
    if (std::find(plan.unlearn_classes.begin(), plan.unlearn_classes.end(), y) ==
        plan.unlearn_classes.end())
      throw ValidationError("unlearn: sample of class " + std::to_string(y) +
                            " is not in the unlearn set");

  std::vector<PseudoLabeledSample> labels;
  switch (plan.labeling) {
    case Labeling::kPseudo:
      labels = pseudo_label_all(net_o, d_u, plan.unlearn_classes);
      break;
    case Labeling::kRandom:
      labels = random_labels(d_u, derive_seed(plan.seed, "random-labels"));
      break;
    case Labeling::kKeep:
      for (std::size_t i = 0; i < d_u.size(); ++i) labels.push_back({i, d_u.labels[i], d_u.labels[i]});
      break;
  }

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < d_u.size(); ++i) by_class[d_u.labels[i]].push_back(i);
  if (plan.use_null_space) {
    if (!projectors) throw ValidationError("unlearn: null-space plan without projectors");
    for (const auto& [c, idx] : by_class)
      if (!projectors->has_class(c))
        throw ValidationError("unlearn: no projector for class " + std::to_string(c));
  }

  if (log) {
    *log = UnlearnLog{};
    log->labels = labels;
  }
  Network net = net_o;
  const Matrix x_all = d_u.columns();
  Rng rng(plan.seed);
  const double sign = plan.ascend ? -1.0 : 1.0;

  for (std::size_t epoch = 0; epoch < plan.schedule.epochs; ++epoch) {
    struct Batch {
      int cls;
      std::vector<std::size_t> idx;
    };
    std::vector<Batch> batches;
    for (auto& [c, idx] : by_class) {
      rng.shuffle(idx);
      for (std::size_t s = 0; s < idx.size(); s += plan.schedule.batch_size) {
        const std::size_t e = std::min(idx.size(), s + plan.schedule.batch_size);
        batches.push_back({c, std::vector<std::size_t>(idx.begin() + s, idx.begin() + e)});
      }
    }
    rng.shuffle(batches);

    double loss_sum = 0.0;
    for (const auto& b : batches) {
      Matrix xb(x_all.rows(), b.idx.size());
      std::vector<int> yb(b.idx.size());
      for (std::size_t j = 0; j < b.idx.size(); ++j) {
        for (std::size_t i = 0; i < x_all.rows(); ++i) xb(i, j) = x_all(i, b.idx[j]);
        yb[j] = labels[b.idx[j]].assigned;
      }
      GradientSet g = loss_and_grads(net, xb, yb);
      if (!std::isfinite(g.loss))
        throw NumericError("unlearn: non-finite loss at epoch " + std::to_string(epoch));
      loss_sum += g.loss * static_cast<double>(b.idx.size());
      const NullProjector* p = plan.use_null_space ? &projectors->get(b.cls) : nullptr;
      for (std::size_t l = 0; l < net.num_layers(); ++l) {
        Matrix step = p ? apply_projection(g.grads[l], p->projectors[l]) : std::move(g.grads[l]);
        net.weights(l) -= (sign * plan.schedule.lr) * step;
      }
    }
    for (std::size_t l = 0; l < net.num_layers(); ++l)
      if (!all_finite(net.weights(l)))
        throw NumericError("unlearn: non-finite weights at epoch " + std::to_string(epoch));

    if (log) {
      log->epoch_loss.push_back(loss_sum / static_cast<double>(d_u.size()));
      log->unlearn_train_accuracy.push_back(accuracy(net, d_u));
    }
  }
  return net;
}

Network unsc_unlearn(const Network& net_o, const Dataset& d_u, const ProjectorCache& projectors,
                     const UnlearnSchedule& schedule, std::span<const int> unlearn_classes,
                     std::uint64_t seed, UnlearnLog* log) {
  UnlearnPlan plan;
  plan.unlearn_classes.assign(unlearn_classes.begin(), unlearn_classes.end());
  plan.labeling = Labeling::kPseudo;
  plan.use_null_space = true;
  plan.schedule = schedule;
  plan.epsilons = projectors.epsilons();
  plan.seed = seed;
  return run_unlearn(net_o, d_u, plan, &projectors, log);
}

Network baseline_unlearn(const Network& net_o, const Dataset& d_u, const UnlearnPlan& plan,
                         const ProjectorCache* projectors, UnlearnLog* log) {
  return run_unlearn(net_o, d_u, plan, projectors, log);
}

Network retrain_oracle(const std::vector<LayerSpec>& specs, std::size_t num_classes,
                       const Dataset& d_r, const Dataset& val, const TrainSchedule& schedule,
                       std::uint64_t init_seed) {
  if (d_r.size() == 0) throw ValidationError("retrain: empty remaining set");
  return train(Network::initialize(specs, num_classes, init_seed), d_r, val, schedule);
}

}  // namespace unsc
