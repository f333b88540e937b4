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

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "stclr/encoder/network.hpp"
#include "stclr/error.hpp"
#include "stclr/nn/parameter.hpp"

namespace stclr::trainer {

using nn::Tensor;

inline constexpr char kCheckpointMagic[8] = {'S', 'T', 'C', 'L', 'R', 'C', 'K', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor<float> value;
  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

// Layout (little endian): magic, u32 version, u64 encoder digest, u64 epoch,
// then length-prefixed kind, encoder spec JSON and RNG state strings, u32
// tensor count and per tensor: name, u32 rank, u64 dims, f32 values.
struct Checkpoint {
  std::string kind;  // "pretrain" or "finetune"
  std::uint64_t digest = 0;
  std::uint64_t epoch = 0;
  std::string encoder_json;
  std::string rng_state;
  std::vector<NamedTensor> tensors;

  const NamedTensor* find(const std::string& name) const {
    for (const auto& t : tensors)
      if (t.name == name) return &t;
    return nullptr;
  }

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

namespace detail {

template <typename U>
void put(std::ostream& out, U v) {
  static_assert(std::is_trivially_copyable_v<U>);
  unsigned char bytes[sizeof(U)];
  std::memcpy(bytes, &v, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(U));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <typename U>
U get(std::istream& in, const std::string& file) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) throw CheckpointError("truncated checkpoint " + file);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(U));
  U v;
  std::memcpy(&v, bytes, sizeof(U));
  return v;
}

inline void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in, const std::string& file) {
  const auto n = get<std::uint32_t>(in, file);
  if (n > (1u << 30)) throw CheckpointError("corrupt string length in " + file);
  std::string s(n, '\0');
  if (n && !in.read(s.data(), n)) throw CheckpointError("truncated checkpoint " + file);
  return s;
}

}  // namespace detail

inline void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  const auto tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw CheckpointError("cannot write " + tmp);
    out.write(kCheckpointMagic, sizeof kCheckpointMagic);
    detail::put<std::uint32_t>(out, kCheckpointVersion);
    detail::put<std::uint64_t>(out, ck.digest);
    detail::put<std::uint64_t>(out, ck.epoch);
    detail::put_string(out, ck.kind);
    detail::put_string(out, ck.encoder_json);
    detail::put_string(out, ck.rng_state);
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.tensors.size()));
    for (const auto& t : ck.tensors) {
      detail::put_string(out, t.name);
      detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(t.value.rank()));
      for (auto d : t.value.shape()) detail::put<std::uint64_t>(out, d);
      for (float v : t.value.values()) detail::put<float>(out, v);
    }
    if (!out) throw CheckpointError("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, file);
}

inline Checkpoint load_checkpoint(const std::filesystem::path& file) {
  const std::string name = file.string();
  std::ifstream in(file, std::ios::binary);
  if (!in) throw CheckpointError("cannot read checkpoint " + name);
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw CheckpointError(name + " is not a checkpoint");
  if (detail::get<std::uint32_t>(in, name) != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version in " + name);
  Checkpoint ck;
  ck.digest = detail::get<std::uint64_t>(in, name);
  ck.epoch = detail::get<std::uint64_t>(in, name);
  ck.kind = detail::get_string(in, name);
  ck.encoder_json = detail::get_string(in, name);
  ck.rng_state = detail::get_string(in, name);
  const auto count = detail::get<std::uint32_t>(in, name);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = detail::get_string(in, name);
    const auto rank = detail::get<std::uint32_t>(in, name);
    if (rank > 8) throw CheckpointError("corrupt tensor rank in " + name);
    nn::Shape shape(rank);
    for (auto& d : shape) d = detail::get<std::uint64_t>(in, name);
    t.value = Tensor<float>(shape);
    for (auto& v : t.value.values()) v = detail::get<float>(in, name);
    ck.tensors.push_back(std::move(t));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw CheckpointError("trailing bytes in " + name);
  return ck;
}

template <typename T>
void append_parameters(Checkpoint& ck, const std::vector<nn::Parameter<T>>& params, bool optimizer_state) {
  for (auto p : params) {
    ck.tensors.push_back({p.name(), p.value().template cast<float>()});
    if (!optimizer_state) continue;
    if (!p.momentum().empty()) ck.tensors.push_back({p.name() + "#momentum", p.momentum().template cast<float>()});
    if (!p.first_moment().empty()) ck.tensors.push_back({p.name() + "#m", p.first_moment().template cast<float>()});
    if (!p.second_moment().empty()) ck.tensors.push_back({p.name() + "#v", p.second_moment().template cast<float>()});
  }
}

template <typename T>
void append_buffers(Checkpoint& ck, const std::vector<nn::Buffer<T>>& buffers) {
  for (const auto& b : buffers) ck.tensors.push_back({b.name, b.tensor->template cast<float>()});
}

namespace detail {

template <typename T>
void assign(Tensor<T>& dst, const NamedTensor& src) {
  if (dst.shape() != src.value.shape())
    throw CheckpointError("tensor '" + src.name + "' has shape " + nn::shape_str(src.value.shape()) +
                          ", expected " + nn::shape_str(dst.shape()));
  dst = src.value.template cast<T>();
}

}  // namespace detail

// Copies named parameters (and optimizer slots when present) out of a
// checkpoint. Every parameter must be present.
template <typename T>
void restore_parameters(const Checkpoint& ck, std::vector<nn::Parameter<T>>& params, bool optimizer_state) {
  for (auto& p : params) {
    const auto* t = ck.find(p.name());
    if (!t) throw CheckpointError("checkpoint lacks tensor '" + p.name() + "'");
    detail::assign(p.value(), *t);
    if (!optimizer_state) continue;
    if (const auto* m = ck.find(p.name() + "#momentum")) p.momentum() = m->value.template cast<T>();
    if (const auto* m = ck.find(p.name() + "#m")) p.first_moment() = m->value.template cast<T>();
    if (const auto* v = ck.find(p.name() + "#v")) p.second_moment() = v->value.template cast<T>();
  }
}

template <typename T>
void restore_buffers(const Checkpoint& ck, const std::vector<nn::Buffer<T>>& buffers) {
  for (const auto& b : buffers) {
    const auto* t = ck.find(b.name);
    if (!t) throw CheckpointError("checkpoint lacks buffer '" + b.name + "'");
    detail::assign(*b.tensor, *t);
  }
}

inline encoder::EncoderSpec checkpoint_encoder_spec(const Checkpoint& ck) {
  try {
    return encoder::encoder_spec_from_json(nlohmann::json::parse(ck.encoder_json));
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("checkpoint encoder spec is unreadable: ") + e.what());
  }
}

inline void require_digest(const Checkpoint& ck, const encoder::EncoderSpec& spec) {
  if (ck.digest != encoder::digest(spec))
    throw CheckpointError("checkpoint was trained for a different encoder architecture");
}

}  // namespace stclr::trainer
