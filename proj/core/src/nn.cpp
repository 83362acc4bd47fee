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

#include "unsc/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "unsc/errors.hpp"
#include "unsc/rng.hpp"

namespace unsc {

using nlohmann::json;

LayerSpec LayerSpec::dense(std::size_t in, std::size_t out, Activation act) {
  LayerSpec s;
  s.kind = LayerKind::kDense;
  s.activation = act;
  s.fan_in = in;
  s.fan_out = out;
  return s;
}

LayerSpec LayerSpec::conv(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                          std::size_t stride, std::size_t height, std::size_t width,
                          Activation act) {
  LayerSpec s;
  s.kind = LayerKind::kConv;
  s.activation = act;
  s.in_channels = in_channels;
  s.out_channels = out_channels;
  s.kernel_size = kernel;
  s.stride = stride;
  s.in_height = height;
  s.in_width = width;
  return s;
}

std::size_t LayerSpec::out_height() const { return (in_height - kernel_size) / stride + 1; }
std::size_t LayerSpec::out_width() const { return (in_width - kernel_size) / stride + 1; }

std::size_t LayerSpec::input_dim() const {
  return kind == LayerKind::kDense ? fan_in : in_channels * in_height * in_width;
}

std::size_t LayerSpec::output_dim() const {
  return kind == LayerKind::kDense ? fan_out : out_channels * out_height() * out_width();
}

std::size_t LayerSpec::weight_rows() const {
  return kind == LayerKind::kDense ? fan_out : out_channels;
}

std::size_t LayerSpec::weight_cols() const {
  return (kind == LayerKind::kDense ? fan_in : in_channels * kernel_size * kernel_size) + 1;
}

void LayerSpec::validate() const {
  if (kind == LayerKind::kDense) {
    if (fan_in == 0 || fan_out == 0) throw ValidationError("dense layer: zero dimension");
    return;
  }
  if (in_channels == 0 || out_channels == 0 || kernel_size == 0 || in_height == 0 ||
      in_width == 0)
    throw ValidationError("conv layer: zero dimension");
  if (stride == 0) throw ValidationError("conv layer: stride must be >= 1");
  if (kernel_size > in_height || kernel_size > in_width)
    throw ValidationError("conv layer: kernel " + std::to_string(kernel_size) +
                          " larger than input " + std::to_string(in_height) + "x" +
                          std::to_string(in_width));
}

Network::Network(std::vector<Layer> layers, std::size_t num_classes)
    : layers_(std::move(layers)), num_classes_(num_classes) {
  if (layers_.empty()) throw ValidationError("network: no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& s = layers_[l].spec;
    s.validate();
    if (layers_[l].weights.rows() != s.weight_rows() || layers_[l].weights.cols() != s.weight_cols())
      throw ValidationError("network: layer " + std::to_string(l) + " weight shape mismatch");
    if (l > 0 && layers_[l - 1].spec.output_dim() != s.input_dim())
      throw ValidationError("network: layer " + std::to_string(l) + " expects " +
                            std::to_string(s.input_dim()) + " inputs, previous emits " +
                            std::to_string(layers_[l - 1].spec.output_dim()));
    require_finite(layers_[l].weights, "network weights");
  }
  if (layers_.back().spec.output_dim() != num_classes_)
    throw ValidationError("network: final layer emits " +
                          std::to_string(layers_.back().spec.output_dim()) + " values for " +
                          std::to_string(num_classes_) + " classes");
}

Network Network::initialize(const std::vector<LayerSpec>& specs, std::size_t num_classes,
                            std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Layer> layers;
  for (const auto& s : specs) {
    s.validate();
    Matrix w(s.weight_rows(), s.weight_cols());
    const std::size_t kk = s.kind == LayerKind::kConv ? s.kernel_size * s.kernel_size : 1;
    const double fan_in = static_cast<double>(s.weight_cols() - 1);
    const double fan_out = static_cast<double>(s.weight_rows() * kk);
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (std::size_t r = 0; r < w.rows(); ++r)
      for (std::size_t c = 0; c + 1 < w.cols(); ++c) w(r, c) = rng.uniform(-bound, bound);
    layers.push_back({s, std::move(w)});
  }
  return Network(std::move(layers), num_classes);
}

std::vector<LayerSpec> Network::specs() const {
  std::vector<LayerSpec> out;
  for (const auto& l : layers_) out.push_back(l.spec);
  return out;
}

Matrix extract_patches(const Matrix& maps, const LayerSpec& conv) {
  conv.validate();
  if (conv.kind != LayerKind::kConv) throw ValidationError("extract_patches: not a conv layer");
  if (maps.rows() != conv.input_dim())
    throw ValidationError("extract_patches: maps have " + std::to_string(maps.rows()) +
                          " rows, layer expects " + std::to_string(conv.input_dim()));
  const std::size_t k = conv.kernel_size, oh = conv.out_height(), ow = conv.out_width();
  const std::size_t h = conv.in_height, w = conv.in_width, channels = conv.in_channels;
  const std::size_t per_sample = oh * ow;
  Matrix out(channels * k * k, maps.cols() * per_sample);
  for (std::size_t b = 0; b < maps.cols(); ++b) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const std::size_t col = b * per_sample + oy * ow + ox;
        for (std::size_t c = 0; c < channels; ++c)
          for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx) {
              const std::size_t y = oy * conv.stride + ky, x = ox * conv.stride + kx;
              out((c * k + ky) * k + kx, col) = maps((c * h + y) * w + x, b);
            }
      }
    }
  }
  return out;
}

Matrix fold_patches(const Matrix& patches, const LayerSpec& conv, std::size_t batch) {
  const std::size_t k = conv.kernel_size, oh = conv.out_height(), ow = conv.out_width();
  const std::size_t h = conv.in_height, w = conv.in_width, channels = conv.in_channels;
  const std::size_t per_sample = oh * ow;
  Matrix maps(conv.input_dim(), batch);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const std::size_t col = b * per_sample + oy * ow + ox;
        for (std::size_t c = 0; c < channels; ++c)
          for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx) {
              const std::size_t y = oy * conv.stride + ky, x = ox * conv.stride + kx;
              maps((c * h + y) * w + x, b) += patches((c * k + ky) * k + kx, col);
            }
      }
  return maps;
}

namespace {

Matrix augment(const Matrix& x) {
  Matrix a(x.rows() + 1, x.cols());
  std::copy(x.data().begin(), x.data().end(), a.data().begin());
  for (double& v : a.row(x.rows())) v = 1.0;
  return a;
}

Matrix drop_last_row(const Matrix& m) {
  Matrix out(m.rows() - 1, m.cols());
  std::copy(m.data().begin(), m.data().begin() + out.size(), out.data().begin());
  return out;
}

struct Tape {
  std::vector<Matrix> inputs;  // augmented layer inputs
  std::vector<Matrix> pre;     // pre-activations, weight_rows x columns
  Matrix logits;
};

Tape run(const Network& net, const Matrix& batch) {
  if (batch.rows() != net.input_dim())
    throw ValidationError("forward: batch has " + std::to_string(batch.rows()) +
                          " features, network expects " + std::to_string(net.input_dim()));
  const std::size_t n = batch.cols();
  Tape tape;
  Matrix x = batch;
  for (const auto& layer : net.layers()) {
    const auto& s = layer.spec;
    Matrix a = s.kind == LayerKind::kDense ? augment(x) : augment(extract_patches(x, s));
    Matrix z = matmul(layer.weights, a);
    Matrix act = z;
    if (s.activation == Activation::kRelu)
      for (double& v : act.data()) v = v > 0.0 ? v : 0.0;
    if (s.kind == LayerKind::kDense) {
      x = std::move(act);
    } else {
      const std::size_t per = s.out_height() * s.out_width();
      x = Matrix(s.output_dim(), n);
      for (std::size_t oc = 0; oc < s.out_channels; ++oc)
        for (std::size_t b = 0; b < n; ++b)
          for (std::size_t p = 0; p < per; ++p) x(oc * per + p, b) = act(oc, b * per + p);
    }
    tape.inputs.push_back(std::move(a));
    tape.pre.push_back(std::move(z));
  }
  tape.logits = std::move(x);
  return tape;
}

}  // namespace

ForwardResult forward(const Network& net, const Matrix& batch, bool record) {
  Tape tape = run(net, batch);
  ForwardResult out{std::move(tape.logits), std::nullopt};
  if (record) out.trace = ActivationTrace{std::move(tape.inputs)};
  return out;
}

Matrix softmax(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (std::size_t b = 0; b < logits.cols(); ++b) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < logits.rows(); ++k) mx = std::max(mx, logits(k, b));
    double sum = 0.0;
    for (std::size_t k = 0; k < logits.rows(); ++k) {
      p(k, b) = std::exp(logits(k, b) - mx);
      sum += p(k, b);
    }
    for (std::size_t k = 0; k < logits.rows(); ++k) p(k, b) /= sum;
  }
  return p;
}

double cross_entropy(const Matrix& logits, std::span<const int> labels) {
  if (labels.size() != logits.cols()) throw ValidationError("cross_entropy: label count mismatch");
  double total = 0.0;
  for (std::size_t b = 0; b < logits.cols(); ++b) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < logits.rows(); ++k) mx = std::max(mx, logits(k, b));
    double sum = 0.0;
    for (std::size_t k = 0; k < logits.rows(); ++k) sum += std::exp(logits(k, b) - mx);
    total += mx + std::log(sum) - logits(static_cast<std::size_t>(labels[b]), b);
  }
  return total / static_cast<double>(logits.cols());
}

std::vector<int> argmax_columns(const Matrix& m) {
  std::vector<int> out(m.cols(), 0);
  for (std::size_t b = 0; b < m.cols(); ++b) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < m.rows(); ++k)
      if (m(k, b) > m(best, b)) best = k;
    out[b] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> predict(const Network& net, const Matrix& batch) {
  return argmax_columns(forward(net, batch).logits);
}

double accuracy(const Network& net, const Dataset& ds) {
  if (ds.size() == 0) throw ValidationError("accuracy: empty dataset");
  const auto pred = predict(net, ds.columns());
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == ds.labels[i];
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

GradientSet loss_and_grads(const Network& net, const Matrix& batch, std::span<const int> labels) {
  if (labels.size() != batch.cols())
    throw ValidationError("loss_and_grads: " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(batch.cols()) + " samples");
  for (int y : labels)
    if (y < 0 || static_cast<std::size_t>(y) >= net.num_classes())
      throw ValidationError("loss_and_grads: label " + std::to_string(y) + " outside [0, " +
                            std::to_string(net.num_classes()) + ")");
  const std::size_t n = batch.cols();
  Tape tape = run(net, batch);

  GradientSet out;
  out.loss = cross_entropy(tape.logits, labels);
  out.grads.resize(net.num_layers());

  Matrix d_out = softmax(tape.logits);
  for (std::size_t b = 0; b < n; ++b) d_out(static_cast<std::size_t>(labels[b]), b) -= 1.0;
  d_out *= 1.0 / static_cast<double>(n);

  for (std::size_t l = net.num_layers(); l-- > 0;) {
    const auto& s = net.layers()[l].spec;
    const Matrix& z = tape.pre[l];
    Matrix dz(z.rows(), z.cols());
    if (s.kind == LayerKind::kDense) {
      dz = std::move(d_out);
    } else {
      const std::size_t per = s.out_height() * s.out_width();
      for (std::size_t oc = 0; oc < s.out_channels; ++oc)
        for (std::size_t b = 0; b < n; ++b)
          for (std::size_t p = 0; p < per; ++p) dz(oc, b * per + p) = d_out(oc * per + p, b);
    }
    if (s.activation == Activation::kRelu)
      for (std::size_t i = 0; i < dz.size(); ++i)
        if (!(z.data()[i] > 0.0)) dz.data()[i] = 0.0;

    out.grads[l] = matmul_nt(dz, tape.inputs[l]);
    if (l == 0) break;
    Matrix da = drop_last_row(matmul_tn(net.weights(l), dz));
    d_out = s.kind == LayerKind::kDense ? std::move(da) : fold_patches(da, s, n);
  }
  return out;
}

void TrainSchedule::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("schedule: lr must be positive");
  if (batch_size == 0) throw ValidationError("schedule: batch_size must be positive");
  if (!(gamma > 0.0)) throw ValidationError("schedule: gamma must be positive");
  if (weight_decay < 0.0) throw ValidationError("schedule: weight_decay must be >= 0");
}

double TrainSchedule::lr_at(std::size_t epoch) const {
  double r = lr;
  for (std::size_t m : milestones)
    if (epoch >= m) r *= gamma;
  return r;
}

Network train(const Network& init, const Dataset& train_set, const Dataset& val_set,
              const TrainSchedule& schedule, TrainLog* log) {
  if (train_set.size() == 0) throw ValidationError("train: empty training set");
  schedule.validate();
  Network net = init;
  if (schedule.epochs == 0) return net;

  const Matrix x_all = train_set.columns();
  const Matrix x_val = val_set.size() > 0 ? val_set.columns() : Matrix();
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(schedule.seed);

  Network best = net;
  double best_acc = -1.0;
  std::size_t since_improvement = 0;
  if (log) *log = TrainLog{};

  for (std::size_t epoch = 0; epoch < schedule.epochs; ++epoch) {
    const double lr = schedule.lr_at(epoch);
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += schedule.batch_size) {
      const std::size_t end = std::min(order.size(), start + schedule.batch_size);
      std::span<const std::size_t> idx(order.data() + start, end - start);
      Matrix xb(x_all.rows(), idx.size());
      std::vector<int> yb(idx.size());
      for (std::size_t j = 0; j < idx.size(); ++j) {
        for (std::size_t i = 0; i < x_all.rows(); ++i) xb(i, j) = x_all(i, idx[j]);
        yb[j] = train_set.labels[idx[j]];
      }
      GradientSet g = loss_and_grads(net, xb, yb);
      if (!std::isfinite(g.loss))
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));
      loss_sum += g.loss * static_cast<double>(idx.size());
      for (std::size_t l = 0; l < net.num_layers(); ++l) {
        Matrix& w = net.weights(l);
        if (schedule.weight_decay > 0.0) g.grads[l] += schedule.weight_decay * w;
        w -= lr * g.grads[l];
      }
    }
    if (log) log->epoch_loss.push_back(loss_sum / static_cast<double>(order.size()));

    if (val_set.size() == 0) {
      best = net;
      if (log) log->best_epoch = epoch;
      continue;
    }
    const auto pred = argmax_columns(forward(net, x_val).logits);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == val_set.labels[i];
    const double acc = static_cast<double>(hit) / static_cast<double>(pred.size());
    if (log) log->val_accuracy.push_back(acc);
    if (acc > best_acc) since_improvement = 0;
    else ++since_improvement;
    if (acc >= best_acc) {
      best_acc = acc;
      best = net;
      if (log) log->best_epoch = epoch;
    }
    if (schedule.patience > 0 && since_improvement >= schedule.patience) break;
  }
  return best;
}

namespace {

const char* kind_name(LayerKind k) { return k == LayerKind::kDense ? "dense" : "conv"; }
const char* activation_name(Activation a) { return a == Activation::kRelu ? "relu" : "identity"; }

}  // namespace

std::string checkpoint_to_json(const Network& net, std::uint64_t seed,
                               const std::string& metadata_json) {
  json layers = json::array();
  for (const auto& layer : net.layers()) {
    const auto& s = layer.spec;
    json jl{{"kind", kind_name(s.kind)}, {"activation", activation_name(s.activation)}};
    if (s.kind == LayerKind::kDense) {
      jl["fan_in"] = s.fan_in;
      jl["fan_out"] = s.fan_out;
    } else {
      jl["in_channels"] = s.in_channels;
      jl["out_channels"] = s.out_channels;
      jl["kernel_size"] = s.kernel_size;
      jl["stride"] = s.stride;
      jl["in_height"] = s.in_height;
      jl["in_width"] = s.in_width;
    }
    json rows = json::array();
    for (std::size_t r = 0; r < layer.weights.rows(); ++r) {
      auto row = layer.weights.row(r);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    jl["weights"] = std::move(rows);
    layers.push_back(std::move(jl));
  }
  json doc{{"format_version", 1},
           {"kind", "unsc.checkpoint"},
           {"num_classes", net.num_classes()},
           {"seed", seed},
           {"metadata", json::parse(metadata_json)},
           {"layers", std::move(layers)}};
  return doc.dump(1) + "\n";
}

Network checkpoint_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  try {
    if (doc.at("kind") != "unsc.checkpoint") throw ParseError("checkpoint: wrong document kind");
    if (doc.at("format_version").get<int>() != 1)
      throw ParseError("checkpoint: unsupported format_version");
    std::vector<Layer> layers;
    for (const auto& jl : doc.at("layers")) {
      LayerSpec s;
      const std::string kind = jl.at("kind");
      const std::string act = jl.at("activation");
      if (act != "relu" && act != "identity") throw ParseError("checkpoint: unknown activation " + act);
      const Activation a = act == "relu" ? Activation::kRelu : Activation::kIdentity;
      if (kind == "dense") {
        s = LayerSpec::dense(jl.at("fan_in"), jl.at("fan_out"), a);
      } else if (kind == "conv") {
        s = LayerSpec::conv(jl.at("in_channels"), jl.at("out_channels"), jl.at("kernel_size"),
                            jl.at("stride"), jl.at("in_height"), jl.at("in_width"), a);
      } else {
        throw ParseError("checkpoint: unknown layer kind " + kind);
      }
      const auto rows = jl.at("weights").get<std::vector<std::vector<double>>>();
      Matrix w(rows.size(), rows.empty() ? 0 : rows.front().size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != w.cols()) throw ParseError("checkpoint: ragged weight matrix");
        std::copy(rows[r].begin(), rows[r].end(), w.row(r).begin());
      }
      layers.push_back({s, std::move(w)});
    }
    return Network(std::move(layers), doc.at("num_classes").get<std::size_t>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Network& net, const std::filesystem::path& path, std::uint64_t seed,
                     const std::string& metadata_json) {
  write_file(path, checkpoint_to_json(net, seed, metadata_json));
}

Network load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_file(path));
}

}  // namespace unsc
