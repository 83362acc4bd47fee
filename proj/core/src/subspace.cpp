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

#include "unsc/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "unsc/errors.hpp"

namespace unsc {

using nlohmann::json;

void validate_epsilons(std::span<const double> epsilons, std::size_t num_layers) {
  if (epsilons.size() != num_layers)
    throw ValidationError("epsilons: " + std::to_string(epsilons.size()) + " values for " +
                          std::to_string(num_layers) + " layers");
  for (double e : epsilons)
    if (!(e > 0.0 && e <= 1.0))
      throw ValidationError("epsilons: " + std::to_string(e) + " outside (0, 1]");
}

ClassSubspace class_subspace(const Network& net, const Matrix& batch,
                             std::span<const int> labels, std::span<const double> epsilons) {
  if (batch.cols() == 0 || labels.empty()) throw ValidationError("class_subspace: empty batch");
  if (labels.size() != batch.cols())
    throw ValidationError("class_subspace: label count does not match batch");
  const int k = labels.front();
  for (int y : labels)
    if (y != k)
      throw ValidationError("class_subspace: mixed labels " + std::to_string(k) + " and " +
                            std::to_string(y));
  if (!epsilons.empty()) validate_epsilons(epsilons, net.num_layers());

  ForwardResult fr = forward(net, batch, /*record=*/true);
  ClassSubspace out;
  out.class_id = k;
  out.sample_count = batch.cols();
  out.epsilons.assign(epsilons.begin(), epsilons.end());
  for (const Matrix& r : fr.trace->inputs) {
    SvdResult d = svd(r);
    out.bases.push_back(std::move(d.u));
    out.singular_values.push_back(std::move(d.s));
  }
  return out;
}

NullProjector merge_null_projector(std::span<const ClassSubspace> subspaces,
                                   std::span<const double> epsilons, int excluded_class) {
  if (subspaces.empty()) throw ValidationError("merge_null_projector: no subspaces");
  const std::size_t layers = subspaces.front().num_layers();
  validate_epsilons(epsilons, layers);
  for (const auto& s : subspaces) {
    if (s.num_layers() != layers)
      throw ValidationError("merge_null_projector: layer count mismatch for class " +
                            std::to_string(s.class_id));
    for (std::size_t l = 0; l < layers; ++l)
      if (s.bases[l].rows() != subspaces.front().bases[l].rows())
        throw ValidationError("merge_null_projector: layer " + std::to_string(l) +
                              " shape mismatch for class " + std::to_string(s.class_id));
  }

  NullProjector out;
  out.excluded_class = excluded_class;
  out.epsilons.assign(epsilons.begin(), epsilons.end());
  for (std::size_t l = 0; l < layers; ++l) {
    std::vector<Matrix> blocks;
    for (const auto& s : subspaces) {
      Matrix scaled = s.bases[l];
      for (std::size_t r = 0; r < scaled.rows(); ++r)
        for (std::size_t c = 0; c < scaled.cols(); ++c) scaled(r, c) *= s.singular_values[l][c];
      blocks.push_back(std::move(scaled));
    }
    const Matrix concat = hconcat(blocks);
    SvdResult merged = svd(concat);
    // Singular values under the numerical-rank floor are rounding noise of
    // exact zeros; counting them at epsilon = 1 would retain noise directions.
    const double floor = static_cast<double>(std::max(concat.rows(), concat.cols())) *
                         std::numeric_limits<double>::epsilon() * merged.s.front();
    for (double& v : merged.s)
      if (v <= floor) v = 0.0;
    const std::size_t k = rank_cutoff(merged.s, epsilons[l]);
    Matrix basis = merged.u.col_range(0, k);
    out.projectors.push_back(null_projector(basis));
    out.bases.push_back(std::move(basis));
    out.ranks.push_back(k);
  }
  return out;
}

std::vector<double> retained_energy(const NullProjector& p, const ActivationTrace& trace) {
  if (trace.inputs.size() != p.projectors.size())
    throw ValidationError("retained_energy: trace has " + std::to_string(trace.inputs.size()) +
                          " layers, projector " + std::to_string(p.projectors.size()));
  std::vector<double> out;
  for (std::size_t l = 0; l < p.projectors.size(); ++l) {
    const Matrix& r = trace.inputs[l];
    if (r.rows() != p.projectors[l].rows())
      throw ValidationError("retained_energy: layer " + std::to_string(l) + " shape mismatch");
    const double total = frobenius_norm_sq(r);
    if (total == 0.0) {
      out.push_back(1.0);
      continue;
    }
    const Matrix inside = r - matmul(p.projectors[l], r);
    out.push_back(frobenius_norm_sq(inside) / total);
  }
  return out;
}

ProjectorCache::ProjectorCache(std::vector<ClassSubspace> subspaces, std::vector<double> epsilons)
    : subspaces_(std::move(subspaces)), epsilons_(std::move(epsilons)) {
  if (subspaces_.size() < 2)
    throw ValidationError("ProjectorCache: need subspaces of at least two classes");
  std::sort(subspaces_.begin(), subspaces_.end(),
            [](const ClassSubspace& a, const ClassSubspace& b) { return a.class_id < b.class_id; });
  validate_epsilons(epsilons_, subspaces_.front().num_layers());
  for (std::size_t i = 0; i < subspaces_.size(); ++i) slots_.push_back(std::make_unique<Slot>());
}

bool ProjectorCache::has_class(int c) const {
  return std::any_of(subspaces_.begin(), subspaces_.end(),
                     [c](const ClassSubspace& s) { return s.class_id == c; });
}

const NullProjector& ProjectorCache::get(int excluded_class) const {
  std::size_t slot = subspaces_.size();
  for (std::size_t i = 0; i < subspaces_.size(); ++i)
    if (subspaces_[i].class_id == excluded_class) slot = i;
  if (slot == subspaces_.size())
    throw ValidationError("no subspace recorded for class " + std::to_string(excluded_class));
  Slot& s = *slots_[slot];
  std::call_once(s.once, [&] {
    std::vector<ClassSubspace> rest;
    for (const auto& sub : subspaces_)
      if (sub.class_id != excluded_class) rest.push_back(sub);
    s.value = merge_null_projector(rest, epsilons_, excluded_class);
  });
  return *s.value;
}

std::string subspace_to_json(const ClassSubspace& s, const std::string& checkpoint_hash) {
  json layers = json::array();
  for (std::size_t l = 0; l < s.num_layers(); ++l) {
    const Matrix& b = s.bases[l];
    json rows = json::array();
    for (std::size_t r = 0; r < b.rows(); ++r)
      rows.push_back(std::vector<double>(b.row(r).begin(), b.row(r).end()));
    layers.push_back({{"rows", b.rows()},
                      {"cols", b.cols()},
                      {"basis", std::move(rows)},
                      {"singular_values", s.singular_values[l]}});
  }
  json doc{{"format_version", 1},
           {"kind", "unsc.subspace"},
           {"class_id", s.class_id},
           {"sample_count", s.sample_count},
           {"epsilons", s.epsilons},
           {"source_checkpoint_hash", checkpoint_hash},
           {"layers", std::move(layers)}};
  return doc.dump(1) + "\n";
}

ClassSubspace subspace_from_json(const std::string& text, std::string* checkpoint_hash) {
  try {
    const json doc = json::parse(text);
    if (doc.at("kind") != "unsc.subspace") throw ParseError("subspace: wrong document kind");
    if (doc.at("format_version").get<int>() != 1)
      throw ParseError("subspace: unsupported format_version");
    ClassSubspace s;
    s.class_id = doc.at("class_id");
    s.sample_count = doc.at("sample_count");
    s.epsilons = doc.at("epsilons").get<std::vector<double>>();
    for (const auto& jl : doc.at("layers")) {
      const std::size_t rows = jl.at("rows"), cols = jl.at("cols");
      const auto data = jl.at("basis").get<std::vector<std::vector<double>>>();
      if (data.size() != rows) throw ParseError("subspace: basis row count mismatch");
      Matrix b(rows, cols);
      for (std::size_t r = 0; r < rows; ++r) {
        if (data[r].size() != cols) throw ParseError("subspace: ragged basis");
        std::copy(data[r].begin(), data[r].end(), b.row(r).begin());
      }
      s.bases.push_back(std::move(b));
      s.singular_values.push_back(jl.at("singular_values").get<std::vector<double>>());
      if (s.singular_values.back().size() != cols)
        throw ParseError("subspace: singular value count mismatch");
    }
    if (checkpoint_hash) *checkpoint_hash = doc.at("source_checkpoint_hash");
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("subspace: ") + e.what());
  }
}

}  // namespace unsc
