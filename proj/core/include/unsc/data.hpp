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

#ifndef UNSC_DATA_HPP_
#define UNSC_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "unsc/linalg.hpp"

namespace unsc {

// Labeled samples. features holds one sample per row.
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  std::size_t num_classes = 0;
  // Free-form JSON text describing where the data came from.
  std::string provenance;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }

  // Feature columns (dim x |idx|), the layout the network consumes.
  Matrix columns(std::span<const std::size_t> idx) const;
  Matrix columns() const;
  Dataset subset(std::span<const std::size_t> idx) const;
  // Indices of samples whose label is in `classes` (or not in it).
  std::vector<std::size_t> indices_of(std::span<const int> classes, bool inside = true) const;

  // Throws ValidationError / NumericError on broken invariants.
  void validate() const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.features == b.features && a.labels == b.labels && a.num_classes == b.num_classes;
  }
};

struct GaussianMixtureSpec {
  std::vector<std::vector<double>> means;  // K x d
  std::vector<Matrix> covariances;         // K of d x d, symmetric positive-definite
  std::size_t n_per_class = 0;
  std::string name;  // recorded in provenance
};

// Lower-triangular Cholesky factor. Throws ValidationError when the matrix is
// not symmetric positive-definite.
Matrix cholesky(const Matrix& a);

// Samples are generated class by class; each sample is mean + L z with L the
// Cholesky factor and z a vector of Rng::normal() draws.
Dataset gaussian_mixture(const GaussianMixtureSpec& spec, std::uint64_t seed);

GaussianMixtureSpec load_mixture_preset(const std::filesystem::path& path);

struct SplitSpec {
  double train = 0.9;
  double val = 0.1;
  double test = 0.0;
  std::vector<int> unlearn_classes;
  std::uint64_t seed = 0;

  void validate(std::size_t num_classes) const;
};

// Index sets into the source dataset.
struct Split {
  std::vector<std::size_t> train, val, test;
  std::vector<std::size_t> d_u, d_r;                       // partition of train
  std::vector<std::size_t> test_unlearn, test_remaining;   // partition of test
  std::vector<std::size_t> val_remaining;                  // val minus unlearn classes
};

// Stratified split: per class (ascending), the class indices are shuffled and
// cut into n_val = round(val n), n_test = round(test n), n_train = rest.
Split split(const Dataset& ds, const SplitSpec& spec);

// CSV with header f0,...,f{d-1},label; features written with 17 significant
// digits. num_classes == 0 infers max(label) + 1.
void save_csv(const Dataset& ds, const std::filesystem::path& path);
Dataset load_csv(const std::filesystem::path& path, std::size_t num_classes = 0);
std::string to_csv(const Dataset& ds);
Dataset parse_csv(const std::string& text, std::size_t num_classes = 0);

// IDX image/label pair (big-endian, magic 0x00000803 / 0x00000801). Pixels
// are scaled to [0, 1].
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::size_t num_classes = 10);
Dataset parse_idx(std::span<const unsigned char> images, std::span<const unsigned char> labels,
                  std::size_t num_classes = 10);

// FNV-1a of the CSV serialization, as 16 hex digits.
std::string dataset_hash(const Dataset& ds);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);
std::string hex64(std::uint64_t v);

}  // namespace unsc

#endif  // UNSC_DATA_HPP_
