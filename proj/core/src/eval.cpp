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

#include "unsc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>

#include "unsc/errors.hpp"
#include "unsc/rng.hpp"

namespace unsc {

UtilityReport utility(const Network& net, const Dataset& test_remaining,
                      const Dataset& test_unlearn) {
  if (test_remaining.size() == 0) throw ValidationError("utility: empty remaining test set");
  if (test_remaining.dim() != net.input_dim() ||
      (test_unlearn.size() > 0 && test_unlearn.dim() != net.input_dim()))
    throw ValidationError("utility: feature dimension does not match the network");
  const std::size_t k = net.num_classes();
  UtilityReport r;
  std::vector<std::size_t> hits(k, 0);
  r.per_class_count.assign(k, 0);

  auto score = [&](const Dataset& ds, const Matrix& logits) {
    const auto pred = argmax_columns(logits);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const auto y = static_cast<std::size_t>(ds.labels[i]);
      ++r.per_class_count[y];
      if (pred[i] == ds.labels[i]) {
        ++hit;
        ++hits[y];
      }
    }
    return static_cast<double>(hit) / static_cast<double>(pred.size());
  };

  const Matrix logits_r = forward(net, test_remaining.columns()).logits;
  r.acc_remaining_test = score(test_remaining, logits_r);
  r.loss_remaining = cross_entropy(logits_r, test_remaining.labels);
  if (test_unlearn.size() > 0)
    r.acc_unlearn_test = score(test_unlearn, forward(net, test_unlearn.columns()).logits);
  for (std::size_t c = 0; c < k; ++c) {
    if (r.per_class_count[c] == 0) r.per_class_accuracy.push_back(std::nullopt);
    else
      r.per_class_accuracy.push_back(static_cast<double>(hits[c]) /
                                     static_cast<double>(r.per_class_count[c]));
  }
  return r;
}

std::vector<double> confidences(const Network& net, const Dataset& ds) {
  if (ds.size() == 0) return {};
  const Matrix p = softmax(forward(net, ds.columns()).logits);
  std::vector<double> out(p.cols());
  for (std::size_t b = 0; b < p.cols(); ++b) {
    double m = 0.0;
    for (std::size_t k = 0; k < p.rows(); ++k) m = std::max(m, p(k, b));
    out[b] = m;
  }
  return out;
}

ThresholdFit fit_confidence_threshold(std::span<const double> member_conf,
                                      std::span<const double> nonmember_conf) {
  if (member_conf.empty() || nonmember_conf.empty())
    throw ValidationError("mia: empty holdout");
  std::vector<double> m(member_conf.begin(), member_conf.end());
  std::vector<double> n(nonmember_conf.begin(), nonmember_conf.end());
  std::sort(m.begin(), m.end());
  std::sort(n.begin(), n.end());
  std::vector<double> candidates = m;
  candidates.insert(candidates.end(), n.begin(), n.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  candidates.push_back(std::numeric_limits<double>::infinity());

  // Balanced accuracy scaled by 2 |m| |n| is the integer tp |n| + tn |m|, so
  // ties are detected exactly.
  const std::uint64_t nm = m.size(), nn = n.size();
  ThresholdFit best{candidates.back(), -1.0};
  std::uint64_t best_score = 0;
  bool have = false;
  for (double t : candidates) {
    // members predicted member: conf >= t; non-members predicted non-member: conf < t
    const auto tp = static_cast<std::uint64_t>(m.end() - std::lower_bound(m.begin(), m.end(), t));
    const auto tn = static_cast<std::uint64_t>(std::lower_bound(n.begin(), n.end(), t) - n.begin());
    const std::uint64_t score = tp * nn + tn * nm;
    if (!have || score >= best_score) {
      have = true;
      best_score = score;
      best = {t, 0.5 * (static_cast<double>(tp) / static_cast<double>(nm) +
                        static_cast<double>(tn) / static_cast<double>(nn))};
    }
  }
  return best;
}

namespace {

ConfidenceSummary summarize(std::span<const double> c) {
  ConfidenceSummary s;
  s.count = c.size();
  if (c.empty()) return s;
  s.min = *std::min_element(c.begin(), c.end());
  s.max = *std::max_element(c.begin(), c.end());
  double sum = 0.0;
  for (double x : c) sum += x;
  s.mean = sum / static_cast<double>(c.size());
  return s;
}

}  // namespace

MiaReport mia(const Network& net_u, const Dataset& d_u, const Dataset& member_holdout,
              const Dataset& nonmember_holdout) {
  if (d_u.size() == 0) throw ValidationError("mia: empty unlearning set");
  if (member_holdout.size() == 0 || nonmember_holdout.size() == 0)
    throw ValidationError("mia: empty holdout");
  const std::size_t n = std::min(member_holdout.size(), nonmember_holdout.size());
  auto member = confidences(net_u, member_holdout);
  auto nonmember = confidences(net_u, nonmember_holdout);
  member.resize(n);
  nonmember.resize(n);
  const ThresholdFit fit = fit_confidence_threshold(member, nonmember);
  const auto unlearn = confidences(net_u, d_u);
  std::size_t predicted_nonmember = 0;
  for (double c : unlearn) predicted_nonmember += c < fit.threshold;

  MiaReport r;
  r.threshold = fit.threshold;
  r.holdout_balanced_accuracy = fit.balanced_accuracy;
  r.acc_mia = static_cast<double>(predicted_nonmember) / static_cast<double>(unlearn.size());
  r.members = summarize(member);
  r.nonmembers = summarize(nonmember);
  r.unlearn = summarize(unlearn);
  r.holdout_description = "members: first " + std::to_string(n) +
                          " remaining-class training samples; non-members: first " +
                          std::to_string(n) + " remaining-class test samples";
  return r;
}

AuditReport orthogonality_audit(const Network& net_o, const Network& net_u,
                                const ActivationTrace& remaining_trace,
                                const Dataset* remaining_set) {
  if (net_o.specs() != net_u.specs() || net_o.num_classes() != net_u.num_classes())
    throw ValidationError("orthogonality_audit: architectures differ");
  if (remaining_trace.inputs.size() != net_o.num_layers())
    throw ValidationError("orthogonality_audit: trace layer count mismatch");
  AuditReport r;
  for (std::size_t l = 0; l < net_o.num_layers(); ++l) {
    const Matrix delta = net_u.weights(l) - net_o.weights(l);
    const Matrix& trace = remaining_trace.inputs[l];
    if (trace.rows() != delta.cols())
      throw ValidationError("orthogonality_audit: layer " + std::to_string(l) +
                            " trace shape mismatch");
    const double dn = frobenius_norm(delta);
    double worst = 0.0;
    if (dn > 0.0) {
      const Matrix moved = matmul(delta, trace);
      for (std::size_t j = 0; j < trace.cols(); ++j) {
        double rn = 0.0, mn = 0.0;
        for (std::size_t i = 0; i < trace.rows(); ++i) rn += trace(i, j) * trace(i, j);
        for (std::size_t i = 0; i < moved.rows(); ++i) mn += moved(i, j) * moved(i, j);
        if (rn == 0.0) continue;
        worst = std::max(worst, std::sqrt(mn) / (dn * std::sqrt(rn)));
      }
    }
    r.layer_residual.push_back(worst);
    r.max_residual = std::max(r.max_residual, worst);
  }
  if (remaining_set && remaining_set->size() > 0) {
    const Matrix x = remaining_set->columns();
    r.loss_original = cross_entropy(forward(net_o, x).logits, remaining_set->labels);
    r.loss_unlearned = cross_entropy(forward(net_u, x).logits, remaining_set->labels);
    r.loss_change = std::abs(*r.loss_unlearned - *r.loss_original);
  }
  return r;
}

ContourDirections make_contour_directions(const Network& net, const NullProjector& p,
                                          std::uint64_t seed) {
  if (p.projectors.size() != net.num_layers())
    throw ValidationError("contour directions: projector layer count mismatch");
  Rng rng(seed);
  ContourDirections d;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const Matrix& w = net.weights(l);
    if (p.projectors[l].rows() != w.cols())
      throw ValidationError("contour directions: layer " + std::to_string(l) + " shape mismatch");
    Matrix coeff(w.rows(), w.cols());
    for (double& v : coeff.data()) v = rng.normal();
    Matrix in_null = matmul(coeff, p.projectors[l]);
    Matrix off = coeff - in_null;
    const double scale = frobenius_norm(coeff);
    for (Matrix* m : {&in_null, &off}) {
      const double nrm = frobenius_norm(*m);
      if (nrm <= 1e-10 * scale) *m = Matrix(w.rows(), w.cols());
      else *m *= 1.0 / nrm;
    }
    d.null_dir.push_back(std::move(in_null));
    d.off_dir.push_back(std::move(off));
  }
  return d;
}

namespace {

void check_direction(const Network& net, const WeightDirection& d, const char* name) {
  if (d.size() != net.num_layers())
    throw ValidationError(std::string("loss_contour: ") + name + " layer count mismatch");
  bool any = false;
  for (std::size_t l = 0; l < d.size(); ++l) {
    if (d[l].rows() != net.weights(l).rows() || d[l].cols() != net.weights(l).cols())
      throw ValidationError(std::string("loss_contour: ") + name + " shape mismatch at layer " +
                            std::to_string(l));
    const double nrm = frobenius_norm(d[l]);
    if (nrm == 0.0) continue;
    if (std::abs(nrm - 1.0) > 1e-9)
      throw ValidationError(std::string("loss_contour: ") + name + " layer " +
                            std::to_string(l) + " has norm " + std::to_string(nrm) +
                            ", expected 1");
    any = true;
  }
  if (!any) throw ValidationError(std::string("loss_contour: ") + name + " is zero everywhere");
}

}  // namespace

ContourGrid loss_contour(const Network& net, const WeightDirection& null_dir,
                         const WeightDirection& off_dir, std::span<const double> alphas,
                         std::span<const double> betas, const Dataset& remaining_set) {
  check_direction(net, null_dir, "null direction");
  check_direction(net, off_dir, "off direction");
  if (alphas.empty() || betas.empty()) throw ValidationError("loss_contour: empty axis");
  if (remaining_set.size() == 0) throw ValidationError("loss_contour: empty remaining set");
  ContourGrid g;
  g.alphas.assign(alphas.begin(), alphas.end());
  g.betas.assign(betas.begin(), betas.end());
  g.loss = Matrix(alphas.size(), betas.size());
  const Matrix x = remaining_set.columns();
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    for (std::size_t j = 0; j < betas.size(); ++j) {
      Network moved = net;
      for (std::size_t l = 0; l < net.num_layers(); ++l) {
        Matrix& w = moved.weights(l);
        for (std::size_t e = 0; e < w.size(); ++e)
          w.data()[e] += alphas[i] * null_dir[l].data()[e] + betas[j] * off_dir[l].data()[e];
      }
      g.loss(i, j) = cross_entropy(forward(moved, x).logits, remaining_set.labels);
    }
  }
  g.provenance = "alpha: unit-norm direction inside the null space; beta: unit-norm direction "
                 "inside the retained subspace";
  return g;
}

std::string contour_to_csv(const ContourGrid& g) {
  std::string out = "alpha,beta,loss\n";
  char buf[96];
  for (std::size_t i = 0; i < g.alphas.size(); ++i)
    for (std::size_t j = 0; j < g.betas.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", g.alphas[i], g.betas[j], g.loss(i, j));
      out += buf;
    }
  return out;
}

AgreementReport pseudo_label_agreement(std::span<const PseudoLabeledSample> pseudo,
                                       const Dataset& d_u, const Network& net_r) {
  if (pseudo.empty()) throw ValidationError("pseudo_label_agreement: empty list");
  const std::size_t k = net_r.num_classes();
  std::vector<std::size_t> idx;
  for (const auto& p : pseudo) {
    if (p.index >= d_u.size())
      throw ValidationError("pseudo_label_agreement: sample index out of range");
    idx.push_back(p.index);
  }
  const auto pred = predict(net_r, d_u.columns(idx));
  AgreementReport r;
  r.pseudo_histogram.assign(k, 0);
  r.retrained_histogram.assign(k, 0);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < pseudo.size(); ++i) {
    agree += pred[i] == pseudo[i].assigned;
    ++r.pseudo_histogram[static_cast<std::size_t>(pseudo[i].assigned)];
    ++r.retrained_histogram[static_cast<std::size_t>(pred[i])];
  }
  r.agreement = static_cast<double>(agree) / static_cast<double>(pseudo.size());
  return r;
}

}  // namespace unsc
