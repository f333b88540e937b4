// Copyright 2026 The stclr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "stclr/contrastive/nt_xent.hpp"
#include "stclr/nn/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace stclr;
using namespace stclr::contrastive;

namespace {

std::vector<std::vector<double>> rows_of(const Tensor<double>& z) {
  std::vector<std::vector<double>> out(z.dim(0), std::vector<double>(z.dim(1)));
  for (std::size_t i = 0; i < z.dim(0); ++i)
    for (std::size_t d = 0; d < z.dim(1); ++d) out[i][d] = z[i * z.dim(1) + d];
  return out;
}

double loss_of(const Tensor<double>& z, double tau) {
  return nt_xent(Var<double>::constant(z), interleaved_pairs(z.dim(0)), tau).value().item();
}

}  // namespace

TEST(Cosine, IdenticalVectorsGiveOne) {
  std::vector<double> a{0.3, -2, 5};
  EXPECT_DOUBLE_EQ(cosine<double>(a, a), 1.0);
}

TEST(Cosine, OrthogonalVectorsGiveZero) {
  std::vector<double> a{1, 0}, b{0, 1};
  EXPECT_DOUBLE_EQ(cosine<double>(a, b), 0.0);
}

TEST(Cosine, HandArithmetic) {
  std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  EXPECT_NEAR(cosine<double>(a, b), 32.0 / (std::sqrt(14.0) * std::sqrt(77.0)), 1e-15);
  EXPECT_NEAR(cosine<double>(a, b), 0.974631, 1e-6);
}

TEST(Cosine, DegenerateEmbeddingThrows) {
  std::vector<double> a{0, 0, 0}, b{1, 2, 3};
  EXPECT_THROW(cosine<double>(a, b), DegenerateEmbeddingError);
}

TEST(NtXent, SinglePairIsZero) {
  Rng rng(1);
  for (double tau : {0.05, 0.5, 3.0}) {
    auto z = stclr::testing::random_tensor<double>({2, 7}, rng);
    EXPECT_NEAR(loss_of(z, tau), 0.0, 1e-12);
  }
}

TEST(NtXent, TwoPairAnalyticCase) {
  Tensor<double> z({4, 2}, std::vector<double>{1, 0, 1, 0, 0, 1, 0, 1});
  const double expect = -std::log(std::exp(2.0) / (std::exp(2.0) + 2.0));
  EXPECT_NEAR(loss_of(z, 0.5), expect, 1e-6);
  EXPECT_NEAR(expect, 0.23954, 1e-5);
  EXPECT_NEAR(stclr::testing::nt_xent_reference(rows_of(z), interleaved_pairs(4), 0.5), expect, 1e-12);
}

TEST(NtXent, MatchesDoubleLoopOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = trial == 0 ? 8 : rng.uniform_int(1, 16);
    const std::size_t dim = trial == 0 ? 16 : rng.uniform_int(1, 64);
    const double tau = rng.uniform(0.1, 2.0);
    auto z = stclr::testing::random_tensor<double>({2 * n, dim}, rng);
    EXPECT_NEAR(loss_of(z, tau),
                stclr::testing::nt_xent_reference(rows_of(z), interleaved_pairs(2 * n), tau), 1e-6);
  }
}

TEST(NtXent, NonNegative) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = rng.uniform_int(1, 8), dim = rng.uniform_int(2, 10);
    auto z = stclr::testing::random_tensor<double>({2 * n, dim}, rng);
    EXPECT_GE(loss_of(z, rng.uniform(0.05, 2.0)), 0.0);
  }
}

TEST(NtXent, PositiveScaleInvariance) {
  Rng rng(4);
  auto z = stclr::testing::random_tensor<double>({8, 5}, rng);
  const double base = loss_of(z, 0.5);
  for (std::size_t i = 0; i < 8; ++i) {
    auto s = z;
    const double k = rng.uniform(0.01, 100.0);
    for (std::size_t d = 0; d < 5; ++d) s[i * 5 + d] *= k;
    EXPECT_NEAR(loss_of(s, 0.5), base, 1e-6);
  }
}

TEST(NtXent, PairPermutationEquivariance) {
  Rng rng(5);
  const std::size_t n = 6, dim = 9;
  auto z = stclr::testing::random_tensor<double>({2 * n, dim}, rng);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm.begin(), perm.end());
  Tensor<double> p({2 * n, dim});
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t v = 0; v < 2; ++v)
      for (std::size_t d = 0; d < dim; ++d) p[(2 * k + v) * dim + d] = z[(2 * perm[k] + v) * dim + d];
  EXPECT_NEAR(loss_of(p, 0.3), loss_of(z, 0.3), 1e-9);
}

TEST(NtXent, AlignmentMonotonicity) {
  // z0 = (1,0); z1 = (cos a, sin a) approaches z0 as a -> 0; negatives fixed
  // orthogonal to z0.
  double previous = std::numeric_limits<double>::infinity();
  for (double a = 1.5; a >= 0.0; a -= 0.1) {
    Tensor<double> z({4, 3}, std::vector<double>{1, 0, 0, std::cos(a), std::sin(a), 0, 0, 0, 1, 0, 0, 1});
    const double l = loss_of(z, 0.5);
    EXPECT_LT(l, previous);
    previous = l;
  }
}

TEST(NtXent, GradientMatchesFiniteDifferences) {
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    auto z = nn::Var<double>::leaf(stclr::testing::random_tensor<double>({8, 6}, rng));
    auto r = nn::check_gradients("nt_xent", {z}, [&] { return nt_xent(z, interleaved_pairs(8), 0.5); });
    EXPECT_LT(r.max_relative_error, 1e-3);
  }
}

TEST(NtXent, RejectsBadArguments) {
  auto z = Var<double>::constant(Tensor<double>({4, 2}, 1.0));
  EXPECT_THROW(nt_xent(z, interleaved_pairs(4), 0.0), ArgumentError);
  EXPECT_THROW(nt_xent(z, interleaved_pairs(4), -1.0), ArgumentError);
  auto zero = Var<double>::constant(Tensor<double>({2, 2}));
  EXPECT_THROW(nt_xent(zero, interleaved_pairs(2), 0.5), DegenerateEmbeddingError);
}

TEST(AssembleBatch, InterleavedPairs) {
  auto b = assemble_batch(Var<double>::constant(Tensor<double>({4, 3}, 1.0)), {"a", "a", "b", "b"}, 0.5);
  EXPECT_EQ(b.pair_of, (std::vector<std::size_t>{1, 0, 3, 2}));
}

TEST(AssembleBatch, OddCountThrows) {
  EXPECT_THROW(assemble_batch(Var<double>::constant(Tensor<double>({3, 3}, 1.0)), {"a", "a", "b"}, 0.5),
               ArgumentError);
}

TEST(AssembleBatch, ShuffledViewsThrow) {
  EXPECT_THROW(
      assemble_batch(Var<double>::constant(Tensor<double>({4, 3}, 1.0)), {"a", "b", "a", "b"}, 0.5),
      AssemblyError);
  EXPECT_THROW(assemble_batch(Var<double>::constant(Tensor<double>({6, 3}, 1.0)),
                              {"a", "a", "b", "b", "a", "a"}, 0.5),
               AssemblyError);
}
