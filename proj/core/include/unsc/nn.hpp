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

#ifndef UNSC_NN_HPP_
#define UNSC_NN_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "unsc/data.hpp"
#include "unsc/linalg.hpp"

namespace unsc {

enum class LayerKind { kDense, kConv };
enum class Activation { kRelu, kIdentity };

// Geometry of one layer. Feature maps are flattened channel-major:
// index = (c * height + y) * width + x.
struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  Activation activation = Activation::kRelu;
  // Dense.
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  // Conv.
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_size = 0;
  std::size_t stride = 1;
  std::size_t in_height = 0;
  std::size_t in_width = 0;

  static LayerSpec dense(std::size_t in, std::size_t out, Activation act = Activation::kRelu);
  static LayerSpec conv(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                        std::size_t stride, std::size_t height, std::size_t width,
                        Activation act = Activation::kRelu);

  std::size_t out_height() const;
  std::size_t out_width() const;
  // Flattened per-sample input / output widths.
  std::size_t input_dim() const;
  std::size_t output_dim() const;
  // Weight matrix shape. The last column holds the bias, matched by a
  // constant-1 row appended to every layer input.
  std::size_t weight_rows() const;
  std::size_t weight_cols() const;

  void validate() const;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct Layer {
  LayerSpec spec;
  Matrix weights;

  friend bool operator==(const Layer&, const Layer&) = default;
};

class Network {
 public:
  Network() = default;
  // Validates that layers compose and the last one emits num_classes logits.
  Network(std::vector<Layer> layers, std::size_t num_classes);

  // Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero bias.
  static Network initialize(const std::vector<LayerSpec>& specs, std::size_t num_classes,
                            std::uint64_t seed);

  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t num_layers() const { return layers_.size(); }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t input_dim() const { return layers_.front().spec.input_dim(); }
  std::vector<LayerSpec> specs() const;

  const Matrix& weights(std::size_t l) const { return layers_[l].weights; }
  Matrix& weights(std::size_t l) { return layers_[l].weights; }

  friend bool operator==(const Network&, const Network&) = default;

 private:
  std::vector<Layer> layers_;
  std::size_t num_classes_ = 0;
};

// Per-layer augmented inputs. Dense layers store one column per sample, conv
// layers the patch matrix (one column per patch per sample). The last row is
// the constant 1.
struct ActivationTrace {
  std::vector<Matrix> inputs;
};

struct ForwardResult {
  Matrix logits;  // num_classes x batch
  std::optional<ActivationTrace> trace;
};

struct GradientSet {
  std::vector<Matrix> grads;  // same shapes as the weights
  double loss = 0.0;          // mean cross-entropy
};

// batch: input_dim x B, one column per sample.
ForwardResult forward(const Network& net, const Matrix& batch, bool record = false);

// Softmax cross-entropy loss and exact gradients.
GradientSet loss_and_grads(const Network& net, const Matrix& batch, std::span<const int> labels);

// Column-wise softmax of a logits matrix.
Matrix softmax(const Matrix& logits);
// Mean cross-entropy of logits against labels.
double cross_entropy(const Matrix& logits, std::span<const int> labels);
// Argmax per column, lowest index on ties.
std::vector<int> argmax_columns(const Matrix& m);
std::vector<int> predict(const Network& net, const Matrix& batch);
double accuracy(const Network& net, const Dataset& ds);

// Rearranges feature maps (C*H*W x B) into patches (C*k*k x B*OH*OW). Column
// b*OH*OW + oy*OW + ox holds the patch at output position (oy, ox) of sample
// b; row (c*k + ky)*k + kx.
Matrix extract_patches(const Matrix& maps, const LayerSpec& conv);

// Adjoint of extract_patches: scatter-adds patch gradients back onto maps.
Matrix fold_patches(const Matrix& patches, const LayerSpec& conv, std::size_t batch);

struct TrainSchedule {
  double lr = 0.1;
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  std::vector<std::size_t> milestones = {60, 120, 160};
  double gamma = 0.2;  // lr multiplier at each milestone
  double weight_decay = 0.0;
  std::size_t patience = 30;  // 0 disables early stopping
  std::uint64_t seed = 0;

  void validate() const;
  double lr_at(std::size_t epoch) const;
};

struct TrainLog {
  std::vector<double> epoch_loss;
  std::vector<double> val_accuracy;
  std::size_t best_epoch = 0;
};

// Minibatch SGD. Returns the weights of the epoch with the best validation
// accuracy; later epochs win ties. An empty validation set returns the final
// weights.
Network train(const Network& init, const Dataset& train_set, const Dataset& val_set,
              const TrainSchedule& schedule, TrainLog* log = nullptr);

// Checkpoint document {format_version, kind, num_classes, seed, metadata,
// layers}. Doubles round-trip exactly.
std::string checkpoint_to_json(const Network& net, std::uint64_t seed,
                               const std::string& metadata_json = "{}");
Network checkpoint_from_json(const std::string& text);
void save_checkpoint(const Network& net, const std::filesystem::path& path, std::uint64_t seed,
                     const std::string& metadata_json = "{}");
Network load_checkpoint(const std::filesystem::path& path);

}  // namespace unsc

#endif  // UNSC_NN_HPP_
