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

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stclr/encoder/spec.hpp"
#include "stclr/nn/layers.hpp"

namespace stclr::encoder {

using nn::NormMode;
using nn::Var;

namespace detail {

inline nn::Conv3dOptions conv_options(const ConvSpec& c) {
  return {c.in_channels, c.out_channels, c.kernel, c.stride, c.padding, false};
}

}  // namespace detail

// One conv position: a single conv, or spatial conv -> BN -> ReLU -> temporal conv.
template <typename T>
class ConvUnit {
 public:
  ConvUnit(const std::string& name, const ConvUnitSpec& spec, Rng& rng) {
    static const char* kParts[] = {"spatial", "temporal"};
    for (std::size_t i = 0; i < spec.convs.size(); ++i) {
      const std::string n = spec.convs.size() == 2 ? name + "." + kParts[i] : name;
      convs_.emplace_back(n, detail::conv_options(spec.convs[i]), rng);
      if (i + 1 < spec.convs.size()) mids_.emplace_back(n + ".bn", spec.convs[i].out_channels);
    }
  }

  Var<T> forward(Var<T> x, NormMode mode) {
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      x = convs_[i](x);
      if (i < mids_.size()) x = nn::relu(mids_[i](x, mode));
    }
    return x;
  }

  void collect(std::vector<nn::Parameter<T>>& out) const {
    for (const auto& c : convs_) c.collect(out);
    for (const auto& b : mids_) b.collect(out);
  }
  void collect_buffers(std::vector<nn::Buffer<T>>& out) {
    for (auto& b : mids_) b.collect_buffers(out);
  }

 private:
  std::vector<nn::Conv3d<T>> convs_;
  std::vector<nn::BatchNorm3d<T>> mids_;
};

// relu(bn2(second(relu(bn1(first(x))))) + shortcut(x))
template <typename T>
class ResidualBlock {
 public:
  ResidualBlock(const ResidualBlockSpec& spec, Rng& rng)
      : first_(spec.name + ".first", spec.first, rng),
        bn1_(spec.name + ".bn1", spec.first.out_channels()),
        second_(spec.name + ".second", spec.second, rng),
        bn2_(spec.name + ".bn2", spec.second.out_channels()) {
    if (spec.shortcut) {
      shortcut_.emplace(spec.name + ".shortcut", detail::conv_options(*spec.shortcut), rng);
      shortcut_bn_.emplace(spec.name + ".shortcut.bn", spec.shortcut->out_channels);
    }
  }

  Var<T> forward(const Var<T>& x, NormMode mode) {
    Var<T> y = nn::relu(bn1_(first_.forward(x, mode), mode));
    y = bn2_(second_.forward(y, mode), mode);
    Var<T> skip = shortcut_ ? (*shortcut_bn_)((*shortcut_)(x), mode) : x;
    return nn::relu(nn::add(y, skip));
  }

  void collect(std::vector<nn::Parameter<T>>& out) const {
    first_.collect(out);
    bn1_.collect(out);
    second_.collect(out);
    bn2_.collect(out);
    if (shortcut_) {
      shortcut_->collect(out);
      shortcut_bn_->collect(out);
    }
  }
  void collect_buffers(std::vector<nn::Buffer<T>>& out) {
    first_.collect_buffers(out);
    bn1_.collect_buffers(out);
    second_.collect_buffers(out);
    bn2_.collect_buffers(out);
    if (shortcut_bn_) shortcut_bn_->collect_buffers(out);
  }

 private:
  ConvUnit<T> first_;
  nn::BatchNorm3d<T> bn1_;
  ConvUnit<T> second_;
  nn::BatchNorm3d<T> bn2_;
  std::optional<nn::Conv3d<T>> shortcut_;
  std::optional<nn::BatchNorm3d<T>> shortcut_bn_;
};

// f(x): [B, C, T, H, W] -> h: [B, embedding_dim].
template <typename T>
class Encoder {
 public:
  Encoder(EncoderSpec spec, Rng& rng)
      : spec_((validate(spec), std::move(spec))),
        stem_("stem", spec_.stem, rng),
        stem_bn_("stem.bn", spec_.stem.out_channels()) {
    blocks_.reserve(spec_.blocks.size());
    for (const auto& b : spec_.blocks) blocks_.emplace_back(b, rng);
  }

  Encoder(const Encoder&) = delete;
  Encoder& operator=(const Encoder&) = delete;
  Encoder(Encoder&&) = default;
  Encoder& operator=(Encoder&&) = default;

  Var<T> forward(const Var<T>& x, NormMode mode) {
    const auto& s = x.shape();
    const auto& in = spec_.input_shape;
    if (s.size() != 5 || s[1] != in[0] || s[2] != in[1] || s[3] != in[2] || s[4] != in[3])
      throw ShapeError("encoder expects [B, " + std::to_string(in[0]) + ", " + std::to_string(in[1]) +
                       ", " + std::to_string(in[2]) + ", " + std::to_string(in[3]) + "], got " +
                       nn::shape_str(s));
    return forward_any(x, mode);
  }

  // Forward without the input-shape check (any extent the convs accept).
  Var<T> forward_any(const Var<T>& x, NormMode mode) {
    Var<T> y = nn::relu(stem_bn_(stem_.forward(x, mode), mode));
    for (auto& b : blocks_) y = b.forward(y, mode);
    return nn::flatten(nn::adaptive_avg_pool3d(y, 1, 1, 1));
  }

  std::vector<nn::Parameter<T>> parameters() const {
    std::vector<nn::Parameter<T>> out;
    stem_.collect(out);
    stem_bn_.collect(out);
    for (const auto& b : blocks_) b.collect(out);
    return out;
  }

  std::vector<nn::Buffer<T>> buffers() {
    std::vector<nn::Buffer<T>> out;
    stem_.collect_buffers(out);
    stem_bn_.collect_buffers(out);
    for (auto& b : blocks_) b.collect_buffers(out);
    return out;
  }

  const EncoderSpec& spec() const { return spec_; }

 private:
  EncoderSpec spec_;
  ConvUnit<T> stem_;
  nn::BatchNorm3d<T> stem_bn_;
  std::vector<ResidualBlock<T>> blocks_;
};

struct ProjectionSpec {
  std::size_t input_dim = 512;
  std::size_t hidden_dim = 512;
  std::size_t output_dim = 128;
};

inline ProjectionSpec projection_for(const EncoderSpec& spec) {
  return {spec.embedding_dim, spec.embedding_dim, 128};
}

// g(h) = W2 relu(W1 h + b1) + b2.
template <typename T>
class ProjectionHead {
 public:
  ProjectionHead(const ProjectionSpec& spec, Rng& rng)
      : spec_(spec),
        fc1_("projection.fc1", spec.input_dim, spec.hidden_dim, rng),
        fc2_("projection.fc2", spec.hidden_dim, spec.output_dim, rng) {
    require(spec.input_dim >= 1 && spec.hidden_dim >= 1 && spec.output_dim >= 1,
            "projection dims must be >= 1");
  }

  Var<T> forward(const Var<T>& h) const {
    if (h.shape().size() != 2 || h.shape()[1] != spec_.input_dim)
      throw ShapeError("projection expects [B, " + std::to_string(spec_.input_dim) + "], got " +
                       nn::shape_str(h.shape()));
    return fc2_(nn::relu(fc1_(h)));
  }

  std::vector<nn::Parameter<T>> parameters() const {
    std::vector<nn::Parameter<T>> out;
    fc1_.collect(out);
    fc2_.collect(out);
    return out;
  }

  nn::Dense<T>& fc1() { return fc1_; }
  nn::Dense<T>& fc2() { return fc2_; }
  const ProjectionSpec& spec() const { return spec_; }

 private:
  ProjectionSpec spec_;
  nn::Dense<T> fc1_, fc2_;
};

// h = f(x) for a batch tensor, without recording a graph.
template <typename T>
nn::Tensor<T> encode(Encoder<T>& net, const nn::Tensor<T>& batch, NormMode mode = NormMode::eval) {
  nn::NoGrad guard;
  return net.forward(Var<T>::constant(batch), mode).value();
}

template <typename T>
nn::Tensor<T> project(const ProjectionHead<T>& head, const nn::Tensor<T>& h) {
  nn::NoGrad guard;
  return head.forward(Var<T>::constant(h)).value();
}

}  // namespace stclr::encoder
