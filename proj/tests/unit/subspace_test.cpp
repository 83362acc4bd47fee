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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <thread>

#include "oracles.hpp"
#include "unsc/data.hpp"
#include "unsc/errors.hpp"
#include "unsc/subspace.hpp"

namespace unsc {
namespace {

Dataset blobs(std::size_t n, std::uint64_t seed) {
  GaussianMixtureSpec spec;
  spec.means = {{0, 4}, {-3, -2}, {3, -2}, {0, 0}};
  for (int k = 0; k < 4; ++k) spec.covariances.push_back(Matrix::identity(2));
  spec.n_per_class = n;
  return gaussian_mixture(spec, seed);
}

Network mlp(std::uint64_t seed) {
  return Network::initialize({LayerSpec::dense(2, 12), LayerSpec::dense(12, 10),
                              LayerSpec::dense(10, 4, Activation::kIdentity)},
                             4, seed);
}

struct ClassBatch {
  Matrix x;
  std::vector<int> y;
};

ClassBatch batch_of(const Dataset& ds, int k, std::size_t limit = 1000) {
  const int cls[] = {k};
  auto idx = ds.indices_of(cls);
  if (idx.size() > limit) idx.resize(limit);
  return {ds.columns(idx), std::vector<int>(idx.size(), k)};
}

std::vector<ClassSubspace> all_subspaces(const Network& net, const Dataset& ds) {
  std::vector<ClassSubspace> out;
  for (int k = 0; k < 4; ++k) {
    const auto b = batch_of(ds, k, 40);
    out.push_back(class_subspace(net, b.x, b.y));
  }
  return out;
}

std::vector<double> eps(double v, std::size_t n = 3) { return std::vector<double>(n, v); }

TEST(ClassSubspace, IdenticalSamplesHaveRankOne) {
  const Network net = mlp(1);
  Matrix x(2, 10);
  for (std::size_t c = 0; c < 10; ++c) x.set_col(c, std::vector<double>{0.7, -1.2});
  const ClassSubspace s = class_subspace(net, x, std::vector<int>(10, 2));
  for (std::size_t l = 0; l < s.num_layers(); ++l) {
    EXPECT_GT(s.singular_values[l][0], 1e-8);
    for (std::size_t i = 1; i < s.singular_values[l].size(); ++i)
      EXPECT_LE(s.singular_values[l][i], 1e-8);
  }
}

TEST(ClassSubspace, IdentityLayerMatchesSvdOfAugmentedInputs) {
  Network net = Network::initialize({LayerSpec::dense(2, 2, Activation::kIdentity)}, 2, 1);
  net.weights(0) = Matrix{{1, 0, 0}, {0, 1, 0}};
  const Dataset ds = blobs(30, 2);
  const auto b = batch_of(ds, 1);
  const ClassSubspace s = class_subspace(net, b.x, b.y);
  Matrix aug(3, b.x.cols(), 1.0);
  for (std::size_t c = 0; c < b.x.cols(); ++c) {
    aug(0, c) = b.x(0, c);
    aug(1, c) = b.x(1, c);
  }
  const auto ev = oracle::symmetric_eigenvalues(oracle::naive_matmul(aug, oracle::naive_transpose(aug)));
  ASSERT_EQ(s.singular_values[0].size(), 3u);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_NEAR(s.singular_values[0][i] * s.singular_values[0][i], ev[i], 1e-8 * ev[0]);
  // Each basis vector is an eigenvector of R R^T with the matching eigenvalue.
  const Matrix gram = oracle::naive_matmul(aug, oracle::naive_transpose(aug));
  for (std::size_t i = 0; i < 3; ++i) {
    const Matrix u = s.bases[0].col_range(i, i + 1);
    const Matrix gu = oracle::naive_matmul(gram, u);
    EXPECT_LE(frobenius_norm(gu - u * ev[i]), 1e-8 * ev[0]);
  }
}

TEST(ClassSubspace, DeterministicAndOrthonormal) {
  const Network net = mlp(3);
  const auto b = batch_of(blobs(50, 4), 0);
  const ClassSubspace a = class_subspace(net, b.x, b.y), c = class_subspace(net, b.x, b.y);
  for (std::size_t l = 0; l < a.num_layers(); ++l) {
    EXPECT_EQ(a.bases[l], c.bases[l]);
    EXPECT_LE(orthonormality_defect(a.bases[l]), 1e-8);
    EXPECT_TRUE(std::is_sorted(a.singular_values[l].rbegin(), a.singular_values[l].rend()));
  }
  EXPECT_EQ(a.sample_count, 50u);
  EXPECT_EQ(a.class_id, 0);
}

TEST(ClassSubspace, RejectsMixedLabelsAndEmptyBatches) {
  const Network net = mlp(1);
  EXPECT_THROW(class_subspace(net, Matrix(2, 2), std::vector<int>{0, 1}), ValidationError);
  EXPECT_THROW(class_subspace(net, Matrix(2, 0), std::vector<int>{}), ValidationError);
}

TEST(Merge, FullEnergySingleClassAnnihilatesItsActivations) {
  const Network net = mlp(5);
  const auto b = batch_of(blobs(40, 6), 2);
  const ClassSubspace s = class_subspace(net, b.x, b.y);
  const NullProjector p = merge_null_projector(std::span(&s, 1), eps(1.0));
  const ActivationTrace t = *forward(net, b.x, true).trace;
  for (std::size_t l = 0; l < 3; ++l) {
    const Matrix pr = matmul(p.projectors[l], t.inputs[l]);
    EXPECT_LE(frobenius_norm(pr), 1e-8 * frobenius_norm(t.inputs[l])) << "layer " << l;
  }
}

TEST(Merge, DuplicateClassesAddNoRank) {
  const Network net = mlp(7);
  const auto b = batch_of(blobs(30, 8), 1);
  const ClassSubspace s = class_subspace(net, b.x, b.y);
  const std::vector<ClassSubspace> twice{s, s};
  for (double e : {0.9, 0.99, 1.0}) {
    const NullProjector one = merge_null_projector(std::span(&s, 1), eps(e));
    const NullProjector two = merge_null_projector(twice, eps(e));
    EXPECT_EQ(one.ranks, two.ranks) << e;
  }
}

TEST(Merge, RankBoundsAgainstGramSchmidtOracle) {
  const Network net = mlp(9);
  const Dataset ds = blobs(40, 10);
  const auto subs = all_subspaces(net, ds);
  const std::vector<ClassSubspace> three(subs.begin(), subs.begin() + 3);
  const NullProjector p = merge_null_projector(three, eps(0.97));
  for (std::size_t l = 0; l < 3; ++l) {
    std::vector<Matrix> cols;
    std::size_t single = 0;
    for (const auto& s : three) {
      cols.push_back(s.bases[l]);
      // Energy rank of the class on its own, by cumulative sums.
      double total = 0.0, acc = 0.0;
      for (double v : s.singular_values[l]) total += v * v;
      std::size_t k = 0;
      while (acc < 0.97 * total) acc += std::pow(s.singular_values[l][k++], 2);
      single = std::max(single, k);
    }
    const std::size_t concat_rank = oracle::gram_schmidt_rank(hconcat(cols), 1e-10);
    EXPECT_LE(p.ranks[l], concat_rank) << "layer " << l;
    EXPECT_GE(p.ranks[l], single) << "layer " << l;
    EXPECT_GE(p.ranks[l], 1u);
  }
}

TEST(Merge, RankIsMonotoneInEpsilon) {
  const Network net = mlp(11);
  const auto subs = all_subspaces(net, blobs(40, 12));
  std::vector<std::size_t> prev(3, 0);
  for (double e = 0.5; e <= 1.0 + 1e-12; e += 0.025) {
    const NullProjector p = merge_null_projector(subs, eps(std::min(e, 1.0)));
    for (std::size_t l = 0; l < 3; ++l) {
      EXPECT_GE(p.ranks[l], prev[l]);
      prev[l] = p.ranks[l];
    }
  }
}

TEST(Merge, OrderInvariant) {
  const Network net = mlp(13);
  auto subs = all_subspaces(net, blobs(40, 14));
  const NullProjector a = merge_null_projector(subs, eps(0.99));
  std::reverse(subs.begin(), subs.end());
  std::swap(subs[0], subs[2]);
  const NullProjector b = merge_null_projector(subs, eps(0.99));
  EXPECT_EQ(a.ranks, b.ranks);
  for (std::size_t l = 0; l < 3; ++l)
    EXPECT_LE(frobenius_norm(a.projectors[l] - b.projectors[l]), 1e-8);
}

TEST(Merge, ProjectorsSatisfyProjectorIdentities) {
  const Network net = mlp(15);
  const NullProjector p = merge_null_projector(all_subspaces(net, blobs(30, 16)), eps(0.95));
  for (const Matrix& m : p.projectors) {
    EXPECT_LE(frobenius_norm(matmul(m, m) - m), 1e-10);
    EXPECT_LE(frobenius_norm(m - m.transpose()), 1e-12);
  }
}

TEST(Merge, RejectsEmptyAndMismatchedInputs) {
  EXPECT_THROW(merge_null_projector(std::vector<ClassSubspace>{}, eps(0.99)), ValidationError);
  const auto b = batch_of(blobs(10, 1), 0);
  const ClassSubspace a = class_subspace(mlp(1), b.x, b.y);
  const Network other = Network::initialize(
      {LayerSpec::dense(2, 5), LayerSpec::dense(5, 10), LayerSpec::dense(10, 4)}, 4, 1);
  const ClassSubspace c = class_subspace(other, b.x, b.y);
  EXPECT_THROW(merge_null_projector(std::vector<ClassSubspace>{a, c}, eps(0.99)), ValidationError);
}

TEST(RetainedEnergy, BuildTraceAtFullEnergyIsFullyRetained) {
  const Network net = mlp(17);
  const auto b = batch_of(blobs(40, 18), 3);
  const ClassSubspace s = class_subspace(net, b.x, b.y);
  const ActivationTrace t = *forward(net, b.x, true).trace;
  for (double f : retained_energy(merge_null_projector(std::span(&s, 1), eps(1.0)), t))
    EXPECT_GE(f, 1.0 - 1e-10);
  const NullProjector p97 = merge_null_projector(std::span(&s, 1), eps(0.97));
  for (double f : retained_energy(p97, t)) EXPECT_GE(f, 0.97);
}

TEST(RetainedEnergy, OrthogonalTraceRetainsNothing) {
  NullProjector p;
  p.projectors = {Matrix{{0, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  ActivationTrace t;
  t.inputs = {Matrix{{0, 0}, {1, 2}, {3, -1}}};
  EXPECT_LE(retained_energy(p, t)[0], 1e-10);
  t.inputs = {Matrix(4, 2, 1.0)};
  EXPECT_THROW(retained_energy(p, t), ValidationError);
}

TEST(NullSpace, ProtectedClassesAreAnnihilatedAtFullEnergy) {
  const Network net = mlp(19);
  const Dataset ds = blobs(40, 20);
  const ProjectorCache cache(all_subspaces(net, ds), eps(1.0));
  const NullProjector& p = cache.get(3);
  EXPECT_EQ(p.excluded_class, 3);
  for (int k = 0; k < 3; ++k) {
    const auto b = batch_of(ds, k, 40);
    const ActivationTrace t = *forward(net, b.x, true).trace;
    for (std::size_t l = 0; l < 3; ++l)
      for (std::size_t c = 0; c < t.inputs[l].cols(); ++c) {
        const auto r = t.inputs[l].col(c);
        const Matrix pr = matmul(p.projectors[l], Matrix::column(r));
        EXPECT_LE(frobenius_norm(pr), 1e-6 * norm2(r));
      }
  }
}

TEST(ProjectorCache, BuildsOncePerClassUnderConcurrency) {
  const Network net = mlp(21);
  const ProjectorCache cache(all_subspaces(net, blobs(30, 22)), eps(0.99));
  std::vector<const NullProjector*> seen(8);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i)
    threads.emplace_back([&, i] { seen[i] = &cache.get(i % 2); });
  for (auto& t : threads) t.join();
  for (int i = 2; i < 8; ++i) EXPECT_EQ(seen[i], seen[i % 2]);
  EXPECT_TRUE(cache.has_class(3));
  EXPECT_FALSE(cache.has_class(4));
  EXPECT_THROW(cache.get(7), ValidationError);
}

TEST(Epsilons, OutsideUnitIntervalIsRejected) {
  EXPECT_NO_THROW(validate_epsilons(eps(1.0), 3));
  EXPECT_THROW(validate_epsilons(eps(0.0), 3), ValidationError);
  EXPECT_THROW(validate_epsilons(eps(1.01), 3), ValidationError);
  EXPECT_THROW(validate_epsilons(eps(0.9, 2), 3), ValidationError);
}

TEST(SubspaceArtifact, JsonRoundTripPreservesBasesAndSource) {
  const Network net = mlp(23);
  const auto b = batch_of(blobs(20, 24), 1);
  const ClassSubspace s = class_subspace(net, b.x, b.y, eps(0.99));
  std::string source;
  const ClassSubspace back = subspace_from_json(subspace_to_json(s, "abc123"), &source);
  EXPECT_EQ(source, "abc123");
  EXPECT_EQ(back.class_id, s.class_id);
  EXPECT_EQ(back.sample_count, s.sample_count);
  EXPECT_EQ(back.singular_values, s.singular_values);
  EXPECT_EQ(back.epsilons, s.epsilons);
  for (std::size_t l = 0; l < s.num_layers(); ++l) EXPECT_EQ(back.bases[l], s.bases[l]);
  EXPECT_THROW(subspace_from_json("[]"), ParseError);
}

}  // namespace
}  // namespace unsc
