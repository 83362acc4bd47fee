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

#ifndef UNSC_SUBSPACE_HPP_
#define UNSC_SUBSPACE_HPP_

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "unsc/linalg.hpp"
#include "unsc/nn.hpp"

namespace unsc {

// Layer-wise input-feature subspace of one class: for every layer, the left
// singular vectors and singular values of the recorded input matrix
// (augmented inputs or conv patches, one column each).
struct ClassSubspace {
  int class_id = 0;
  std::vector<Matrix> bases;
  std::vector<std::vector<double>> singular_values;
  std::size_t sample_count = 0;
  std::vector<double> epsilons;  // thresholds the artifact was requested with

  std::size_t num_layers() const { return bases.size(); }
};

// Projectors onto the complement of the merged subspace of every class except
// `excluded_class`.
struct NullProjector {
  int excluded_class = 0;
  std::vector<Matrix> projectors;  // per layer, fan_in x fan_in (augmented)
  std::vector<Matrix> bases;       // retained basis, fan_in x rank
  std::vector<std::size_t> ranks;
  std::vector<double> epsilons;
};

// One epsilon per layer; every value must be in (0, 1].
void validate_epsilons(std::span<const double> epsilons, std::size_t num_layers);

// batch: input_dim x B, labels all equal to class_id. Bases are kept in full;
// truncation happens when classes are merged.
ClassSubspace class_subspace(const Network& net, const Matrix& batch,
                             std::span<const int> labels, std::span<const double> epsilons = {});

// Per layer: concatenate U_k * diag(s_k) over the given classes, SVD the
// concatenation, keep the smallest leading set of directions holding at least
// epsilon of the energy, and return I - S S^T. Singular values at or below
// max(rows, cols) * machine epsilon * s_max count as zero.
NullProjector merge_null_projector(std::span<const ClassSubspace> subspaces,
                                   std::span<const double> epsilons, int excluded_class = -1);

// Per layer ||(I - P) R||_F^2 / ||R||_F^2.
std::vector<double> retained_energy(const NullProjector& p, const ActivationTrace& trace);

// Builds the projector excluding class c on first request and keeps it.
// Concurrent readers see a single construction per class.
class ProjectorCache {
 public:
  ProjectorCache(std::vector<ClassSubspace> subspaces, std::vector<double> epsilons);

  const NullProjector& get(int excluded_class) const;
  bool has_class(int c) const;
  std::size_t num_classes() const { return subspaces_.size(); }
  const std::vector<ClassSubspace>& subspaces() const { return subspaces_; }
  const std::vector<double>& epsilons() const { return epsilons_; }

 private:
  struct Slot {
    std::once_flag once;
    std::optional<NullProjector> value;
  };
  std::vector<ClassSubspace> subspaces_;
  std::vector<double> epsilons_;
  std::vector<std::unique_ptr<Slot>> slots_;
};

std::string subspace_to_json(const ClassSubspace& s, const std::string& checkpoint_hash);
ClassSubspace subspace_from_json(const std::string& text, std::string* checkpoint_hash = nullptr);

}  // namespace unsc

#endif  // UNSC_SUBSPACE_HPP_
