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

#include "unsc/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "unsc/errors.hpp"
#include "unsc/rng.hpp"

namespace unsc {

using nlohmann::json;

Matrix Dataset::columns(std::span<const std::size_t> idx) const {
  Matrix out(dim(), idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    auto row = features.row(idx[j]);
    for (std::size_t i = 0; i < dim(); ++i) out(i, j) = row[i];
  }
  return out;
}

Matrix Dataset::columns() const { return features.transpose(); }

Dataset Dataset::subset(std::span<const std::size_t> idx) const {
  Dataset out;
  out.features = Matrix(idx.size(), dim());
  out.labels.reserve(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    auto src = features.row(idx[j]);
    std::copy(src.begin(), src.end(), out.features.row(j).begin());
    out.labels.push_back(labels[idx[j]]);
  }
  out.num_classes = num_classes;
  out.provenance = provenance;
  return out;
}

std::vector<std::size_t> Dataset::indices_of(std::span<const int> classes, bool inside) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool in = std::find(classes.begin(), classes.end(), labels[i]) != classes.end();
    if (in == inside) out.push_back(i);
  }
  return out;
}

void Dataset::validate() const {
  if (features.rows() != labels.size())
    throw ValidationError("dataset: " + std::to_string(features.rows()) + " feature rows vs " +
                          std::to_string(labels.size()) + " labels");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes)
      throw ValidationError("dataset: label " + std::to_string(labels[i]) + " at sample " +
                            std::to_string(i) + " outside [0, " + std::to_string(num_classes) +
                            ")");
  }
  require_finite(features, "dataset features");
}

Matrix cholesky(const Matrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw ValidationError("cholesky: matrix not square");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-12 * (1.0 + std::abs(a(i, j))))
        throw ValidationError("cholesky: covariance not symmetric");
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) throw ValidationError("cholesky: covariance not positive-definite");
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

Dataset gaussian_mixture(const GaussianMixtureSpec& spec, std::uint64_t seed) {
  const std::size_t k = spec.means.size();
  if (k == 0) throw ValidationError("gaussian_mixture: no classes");
  if (spec.covariances.size() != k)
    throw ValidationError("gaussian_mixture: one covariance per class required");
  if (spec.n_per_class == 0) throw ValidationError("gaussian_mixture: n_per_class must be >= 1");
  const std::size_t d = spec.means.front().size();
  std::vector<Matrix> factors;
  for (std::size_t c = 0; c < k; ++c) {
    if (spec.means[c].size() != d || spec.covariances[c].rows() != d)
      throw ValidationError("gaussian_mixture: inconsistent dimensions for class " +
                            std::to_string(c));
    factors.push_back(cholesky(spec.covariances[c]));
  }

  Rng rng(seed);
  Dataset ds;
  ds.num_classes = k;
  ds.features = Matrix(k * spec.n_per_class, d);
  ds.labels.reserve(k * spec.n_per_class);
  std::vector<double> z(d);
  std::size_t row = 0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t s = 0; s < spec.n_per_class; ++s, ++row) {
      for (double& zi : z) zi = rng.normal();
      auto out = ds.features.row(row);
      for (std::size_t i = 0; i < d; ++i) {
        double v = spec.means[c][i];
        for (std::size_t j = 0; j <= i; ++j) v += factors[c](i, j) * z[j];
        out[i] = v;
      }
      ds.labels.push_back(static_cast<int>(c));
    }
  }
  ds.provenance = json{{"generator", "gaussian_mixture"},
                       {"preset", spec.name},
                       {"n_per_class", spec.n_per_class},
                       {"seed", seed}}
                      .dump();
  return ds;
}

GaussianMixtureSpec load_mixture_preset(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  GaussianMixtureSpec spec;
  try {
    spec.name = j.at("name").get<std::string>();
    spec.n_per_class = j.at("n_per_class").get<std::size_t>();
    spec.means = j.at("means").get<std::vector<std::vector<double>>>();
    for (const auto& c : j.at("covariances")) {
      auto rows = c.get<std::vector<std::vector<double>>>();
      Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols()) throw ValidationError("preset: ragged covariance");
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
      }
      spec.covariances.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return spec;
}

void SplitSpec::validate(std::size_t num_classes) const {
  if (train <= 0.0 || val < 0.0 || test < 0.0)
    throw ValidationError("split: train fraction must be positive, val/test non-negative");
  if (std::abs(train + val + test - 1.0) > 1e-9)
    throw ValidationError("split: fractions must sum to 1");
  if (unlearn_classes.empty()) throw ValidationError("split: unlearn class set is empty");
  if (unlearn_classes.size() >= num_classes)
    throw ValidationError("split: unlearn set must be a strict subset of the classes");
  std::vector<int> sorted = unlearn_classes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ValidationError("split: duplicate unlearn class");
  for (int c : sorted)
    if (c < 0 || static_cast<std::size_t>(c) >= num_classes)
      throw ValidationError("split: unlearn class " + std::to_string(c) + " out of range");
}

Split split(const Dataset& ds, const SplitSpec& spec) {
  spec.validate(ds.num_classes);
  Rng rng(spec.seed);
  Split out;
  for (std::size_t c = 0; c < ds.num_classes; ++c) {
    const int cls = static_cast<int>(c);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (ds.labels[i] == cls) idx.push_back(i);
    rng.shuffle(idx);
    const auto n = static_cast<double>(idx.size());
    const auto n_val = static_cast<std::size_t>(std::llround(spec.val * n));
    const auto n_test = static_cast<std::size_t>(std::llround(spec.test * n));
    if (n_val + n_test >= idx.size())
      throw ValidationError("split: class " + std::to_string(c) + " has no training samples");
    if ((spec.val > 0.0 && n_val == 0) || (spec.test > 0.0 && n_test == 0))
      throw ValidationError("split: class " + std::to_string(c) +
                            " has zero samples in a non-empty split");
    const std::size_t n_train = idx.size() - n_val - n_test;
    out.train.insert(out.train.end(), idx.begin(), idx.begin() + n_train);
    out.val.insert(out.val.end(), idx.begin() + n_train, idx.begin() + n_train + n_val);
    out.test.insert(out.test.end(), idx.begin() + n_train + n_val, idx.end());
  }
  auto unlearn = [&](std::size_t i) {
    return std::find(spec.unlearn_classes.begin(), spec.unlearn_classes.end(), ds.labels[i]) !=
           spec.unlearn_classes.end();
  };
  for (std::size_t i : out.train) (unlearn(i) ? out.d_u : out.d_r).push_back(i);
  for (std::size_t i : out.test) (unlearn(i) ? out.test_unlearn : out.test_remaining).push_back(i);
  for (std::size_t i : out.val)
    if (!unlearn(i)) out.val_remaining.push_back(i);
  return out;
}

std::string to_csv(const Dataset& ds) {
  std::string out;
  for (std::size_t i = 0; i < ds.dim(); ++i) out += "f" + std::to_string(i) + ",";
  out += "label\n";
  char buf[32];
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (double v : ds.features.row(r)) {
      std::snprintf(buf, sizeof buf, "%.17g,", v);
      out += buf;
    }
    out += std::to_string(ds.labels[r]);
    out += '\n';
  }
  return out;
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  write_file(path, to_csv(ds));
}

Dataset parse_csv(const std::string& text, std::size_t num_classes) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("csv line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header.back() != "label")
    throw ParseError("csv line 1: header must end with 'label'");
  const std::size_t d = header.size() - 1;
  for (std::size_t i = 0; i < d; ++i)
    if (header[i] != "f" + std::to_string(i))
      throw ParseError("csv line 1: expected column 'f" + std::to_string(i) + "', found '" +
                       header[i] + "'");

  std::vector<double> values;
  std::vector<int> labels;
  int max_label = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t i = 0; i < d; ++i) {
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || next == end || *next != ',')
        throw ParseError("csv line " + std::to_string(line_no) + ": bad feature f" +
                         std::to_string(i));
      if (!std::isfinite(v))
        throw ParseError("csv line " + std::to_string(line_no) + ": non-finite feature f" +
                         std::to_string(i));
      values.push_back(v);
      p = next + 1;
    }
    int label = 0;
    auto [next, ec] = std::from_chars(p, end, label);
    if (ec != std::errc() || next != end || label < 0)
      throw ParseError("csv line " + std::to_string(line_no) + ": bad label");
    if (num_classes != 0 && static_cast<std::size_t>(label) >= num_classes)
      throw ParseError("csv line " + std::to_string(line_no) + ": label " +
                       std::to_string(label) + " >= K=" + std::to_string(num_classes));
    max_label = std::max(max_label, label);
    labels.push_back(label);
  }
  Dataset ds;
  ds.features = Matrix(labels.size(), d, std::move(values));
  ds.labels = std::move(labels);
  ds.num_classes = num_classes != 0 ? num_classes : static_cast<std::size_t>(max_label + 1);
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, std::size_t num_classes) {
  Dataset ds = parse_csv(read_file(path), num_classes);
  ds.provenance = json{{"source", path.filename().string()},
                       {"hash", hex64(fnv1a64(to_csv(ds)))}}
                      .dump();
  return ds;
}

namespace {

std::uint32_t be32(std::span<const unsigned char> b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

}  // namespace

Dataset parse_idx(std::span<const unsigned char> images, std::span<const unsigned char> labels,
                  std::size_t num_classes) {
  if (images.size() < 16) throw ParseError("idx images: truncated header at byte 0");
  if (labels.size() < 8) throw ParseError("idx labels: truncated header at byte 0");
  const std::uint32_t img_magic = be32(images, 0);
  if (img_magic != 0x00000803u)
    throw ParseError("idx images byte 0: expected magic 0x00000803, found " + hex32(img_magic));
  const std::uint32_t lbl_magic = be32(labels, 0);
  if (lbl_magic != 0x00000801u)
    throw ParseError("idx labels byte 0: expected magic 0x00000801, found " + hex32(lbl_magic));
  const std::size_t n = be32(images, 4);
  const std::size_t rows = be32(images, 8);
  const std::size_t cols = be32(images, 12);
  const std::size_t n_labels = be32(labels, 4);
  if (n != n_labels)
    throw ParseError("idx labels byte 4: " + std::to_string(n_labels) + " labels for " +
                     std::to_string(n) + " images");
  const std::size_t d = rows * cols;
  if (images.size() != 16 + n * d)
    throw ParseError("idx images byte " + std::to_string(images.size()) + ": expected " +
                     std::to_string(16 + n * d) + " bytes");
  if (labels.size() != 8 + n)
    throw ParseError("idx labels byte " + std::to_string(labels.size()) + ": expected " +
                     std::to_string(8 + n) + " bytes");
  Dataset ds;
  ds.num_classes = num_classes;
  ds.features = Matrix(n, d);
  for (std::size_t i = 0; i < n * d; ++i) ds.features.data()[i] = images[16 + i] / 255.0;
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labels[8 + i];
    if (static_cast<std::size_t>(y) >= num_classes)
      throw ParseError("idx labels byte " + std::to_string(8 + i) + ": label " +
                       std::to_string(y) + " >= K=" + std::to_string(num_classes));
    ds.labels[i] = y;
  }
  return ds;
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::size_t num_classes) {
  const std::string img = read_file(images);
  const std::string lbl = read_file(labels);
  auto as_bytes = [](const std::string& s) {
    return std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(s.data()),
                                          s.size());
  };
  Dataset ds = parse_idx(as_bytes(img), as_bytes(lbl), num_classes);
  ds.provenance = json{{"source", images.filename().string()},
                       {"hash", hex64(fnv1a64(img) ^ fnv1a64(lbl))}}
                      .dump();
  return ds;
}

std::string dataset_hash(const Dataset& ds) { return hex64(fnv1a64(to_csv(ds))); }

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ArtifactError("cannot write " + path.string());
  out << bytes;
  if (!out) throw ArtifactError("write failed for " + path.string());
}

}  // namespace unsc
