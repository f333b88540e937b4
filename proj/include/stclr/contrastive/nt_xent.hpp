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

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stclr/error.hpp"
#include "stclr/nn/autograd.hpp"

namespace stclr::contrastive {

using nn::Shape;
using nn::Tensor;
using nn::Var;

inline constexpr double kMinEmbeddingNorm = 1e-12;

// z_i . z_j / (|z_i| |z_j|), clamped to [-1, 1].
template <typename T>
T cosine(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) throw ShapeError("cosine: dimension mismatch");
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < kMinEmbeddingNorm || nb < kMinEmbeddingNorm)
    throw DegenerateEmbeddingError("cosine: embedding norm below 1e-12");
  return static_cast<T>(std::clamp<long double>(dot / (na * nb), -1.0L, 1.0L));
}

// 2N embeddings whose views arrive as adjacent pairs: pair_of(2k) = 2k+1.
template <typename T>
struct ContrastiveBatch {
  Var<T> embeddings;  // [2N, D]
  std::vector<std::size_t> pair_of;
  std::vector<std::string> clip_ids;
  double tau = 0.5;
};

inline std::vector<std::size_t> interleaved_pairs(std::size_t count) {
  if (count == 0 || count % 2 != 0)
    throw ArgumentError("contrastive batch needs an even, non-zero view count, got " +
                        std::to_string(count));
  std::vector<std::size_t> pair_of(count);
  for (std::size_t i = 0; i < count; ++i) pair_of[i] = i ^ 1u;
  return pair_of;
}

// Validates the interleaved layout [a, a, b, b, ...] and records the pairing.
template <typename T>
ContrastiveBatch<T> assemble_batch(Var<T> embeddings, std::vector<std::string> clip_ids, double tau) {
  if (clip_ids.size() % 2 != 0)
    throw ArgumentError("assemble_batch: odd view count " + std::to_string(clip_ids.size()));
  if (tau <= 0) throw ArgumentError("assemble_batch: temperature must be positive");
  if (embeddings.shape().size() != 2 || embeddings.shape()[0] != clip_ids.size())
    throw ShapeError("assemble_batch: embeddings must be [" + std::to_string(clip_ids.size()) +
                     ", D], got " + nn::shape_str(embeddings.shape()));
  for (std::size_t k = 0; k < clip_ids.size(); k += 2) {
    if (clip_ids[k] != clip_ids[k + 1])
      throw AssemblyError("assemble_batch: views " + std::to_string(k) + " and " +
                          std::to_string(k + 1) + " are not from the same clip");
    for (std::size_t j = k + 2; j < clip_ids.size(); ++j)
      if (clip_ids[j] == clip_ids[k])
        throw AssemblyError("assemble_batch: clip '" + clip_ids[k] + "' appears outside its pair");
  }
  ContrastiveBatch<T> batch;
  batch.pair_of = interleaved_pairs(clip_ids.size());
  batch.embeddings = std::move(embeddings);
  batch.clip_ids = std::move(clip_ids);
  batch.tau = tau;
  return batch;
}

// Mean over all 2N anchors i of
//   -log( exp(s_i,p(i)) / sum_{k != i} exp(s_ik) ),  s_ik = cos(z_i, z_k) / tau.
// The positive term stays in the denominator.
template <typename T>
Var<T> nt_xent(const Var<T>& z, const std::vector<std::size_t>& pair_of, double tau) {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  if (tau <= 0) throw ArgumentError("nt_xent: temperature must be positive");
  if (z.shape().size() != 2) throw ShapeError("nt_xent: embeddings must be [2N, D]");
  const std::size_t M = z.shape()[0], D = z.shape()[1];
  if (pair_of.size() != M) throw ArgumentError("nt_xent: pair map size mismatch");
  for (std::size_t i = 0; i < M; ++i)
    if (pair_of[i] >= M || pair_of[i] == i || pair_of[pair_of[i]] != i)
      throw ArgumentError("nt_xent: pair map must be a fixed-point-free involution");

  Eigen::Map<const Mat> zm(z.value().data(), M, D);
  Eigen::Matrix<T, Eigen::Dynamic, 1> norms = zm.rowwise().norm();
  for (std::size_t i = 0; i < M; ++i)
    if (!(norms[i] >= static_cast<T>(kMinEmbeddingNorm)))
      throw DegenerateEmbeddingError("nt_xent: embedding " + std::to_string(i) +
                                     " has norm below 1e-12");
  Mat u = norms.cwiseInverse().asDiagonal() * zm;
  const T inv_tau = static_cast<T>(1.0 / tau);
  Mat s = (u * u.transpose()) * inv_tau;

  // softmax over k != i
  Mat p = Mat::Zero(M, M);
  T total = 0;
  for (std::size_t i = 0; i < M; ++i) {
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t k = 0; k < M; ++k)
      if (k != i) mx = std::max(mx, s(i, k));
    T denom = 0;
    for (std::size_t k = 0; k < M; ++k)
      if (k != i) denom += std::exp(s(i, k) - mx);
    for (std::size_t k = 0; k < M; ++k)
      if (k != i) p(i, k) = std::exp(s(i, k) - mx) / denom;
    total += -(s(i, pair_of[i]) - mx - std::log(denom));
  }
  const T loss = total / static_cast<T>(M);

  return nn::make_result<T>(
      "nt_xent", Tensor<T>(Shape{1}, loss), {z},
      [u = std::move(u), p = std::move(p), norms = std::move(norms), pair_of, M, D,
       inv_tau](nn::Node<T>& self) {
        // dL/ds_ik = (p_ik - [k == pair(i)]) / M
        Mat gs = p;
        for (std::size_t i = 0; i < M; ++i) gs(i, pair_of[i]) -= T(1);
        gs *= self.grad[0] / static_cast<T>(M);
        // s = u u^T / tau  =>  dL/du = (G + G^T) u / tau
        Mat gu = ((gs + gs.transpose()) * u) * inv_tau;
        // u = z / |z|  =>  dL/dz = (gu - u (u . gu)) / |z|
        Tensor<T> gz(Shape{M, D});
        Eigen::Map<Mat> gzm(gz.data(), M, D);
        for (std::size_t i = 0; i < M; ++i) {
          const T proj = u.row(i).dot(gu.row(i));
          gzm.row(i) = (gu.row(i) - proj * u.row(i)) / norms[i];
        }
        nn::accumulate(self, 0, gz);
      });
}

template <typename T>
Var<T> nt_xent(const ContrastiveBatch<T>& batch) {
  return nt_xent(batch.embeddings, batch.pair_of, batch.tau);
}

}  // namespace stclr::contrastive
