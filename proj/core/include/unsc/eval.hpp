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

#ifndef UNSC_EVAL_HPP_
#define UNSC_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "unsc/data.hpp"
#include "unsc/nn.hpp"
#include "unsc/subspace.hpp"
#include "unsc/unlearn.hpp"

namespace unsc {

struct UtilityReport {
  double acc_remaining_test = 0.0;
  std::optional<double> acc_unlearn_test;  // absent for an empty unlearn test set
  // Top-1 accuracy per class over both test sets; absent for classes with no
  // test samples.
  std::vector<std::optional<double>> per_class_accuracy;
  std::vector<std::size_t> per_class_count;
  double loss_remaining = 0.0;
};

UtilityReport utility(const Network& net, const Dataset& test_remaining,
                      const Dataset& test_unlearn);

struct ConfidenceSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct MiaReport {
  double threshold = 0.0;
  double acc_mia = 0.0;  // fraction of d_u predicted non-member
  double holdout_balanced_accuracy = 0.0;
  ConfidenceSummary members;
  ConfidenceSummary nonmembers;
  ConfidenceSummary unlearn;
  std::string holdout_description;
};

// Max-softmax confidence per sample.
std::vector<double> confidences(const Network& net, const Dataset& ds);

struct ThresholdFit {
  double threshold = 0.0;
  double balanced_accuracy = 0.0;
};

// Exhaustive sweep over the distinct holdout confidences plus +infinity;
// samples with confidence >= threshold are predicted members. Among equal
// balanced accuracies the largest threshold wins, so ties fall to
// non-member.
ThresholdFit fit_confidence_threshold(std::span<const double> member_conf,
                                      std::span<const double> nonmember_conf);

// Both holdouts are truncated to the shorter length before fitting.
MiaReport mia(const Network& net_u, const Dataset& d_u, const Dataset& member_holdout,
              const Dataset& nonmember_holdout);

struct AuditReport {
  std::vector<double> layer_residual;  // max_r ||dW r|| / (||dW||_F ||r||)
  double max_residual = 0.0;
  std::optional<double> loss_original;
  std::optional<double> loss_unlearned;
  std::optional<double> loss_change;  // |L_r(u) - L_r(o)|
};

// Residuals over every column of remaining_trace; loss terms only when
// remaining_set is given.
AuditReport orthogonality_audit(const Network& net_o, const Network& net_u,
                                const ActivationTrace& remaining_trace,
                                const Dataset* remaining_set = nullptr);

// One matrix per layer, shaped like the weights.
using WeightDirection = std::vector<Matrix>;

struct ContourDirections {
  WeightDirection null_dir;  // rows lie in the range of P
  WeightDirection off_dir;   // rows lie in the retained subspace
};

// Random Gaussian coefficients pushed through P (null) and I - P (off), each
// layer scaled to unit Frobenius norm. Layers whose component vanishes stay
// zero.
ContourDirections make_contour_directions(const Network& net, const NullProjector& p,
                                          std::uint64_t seed);

struct ContourGrid {
  std::vector<double> alphas;  // null-direction coefficients
  std::vector<double> betas;   // off-direction coefficients
  Matrix loss;                 // alphas.size() x betas.size()
  std::string provenance;
};

// Loss on remaining_set at theta + alpha null_dir + beta off_dir. Every
// direction layer must have Frobenius norm 1 or 0, and at least one layer must
// be nonzero.
ContourGrid loss_contour(const Network& net, const WeightDirection& null_dir,
                         const WeightDirection& off_dir, std::span<const double> alphas,
                         std::span<const double> betas, const Dataset& remaining_set);

std::string contour_to_csv(const ContourGrid& g);

struct AgreementReport {
  double agreement = 0.0;
  std::vector<std::size_t> pseudo_histogram;
  std::vector<std::size_t> retrained_histogram;
};

// d_u rows must match pseudo[i].index.
AgreementReport pseudo_label_agreement(std::span<const PseudoLabeledSample> pseudo,
                                       const Dataset& d_u, const Network& net_r);

}  // namespace unsc

#endif  // UNSC_EVAL_HPP_
