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

#include <array>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stclr/encoder/channels.hpp"
#include "stclr/error.hpp"
#include "stclr/nn/conv3d.hpp"

namespace stclr::encoder {

using nn::Triple;

enum class Preset { paper, tiny };
enum class Variant { r2plus1d, full3d, mixed };

inline std::string to_string(Preset p) { return p == Preset::paper ? "paper" : "tiny"; }
inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::r2plus1d: return "r2plus1d";
    case Variant::full3d: return "full3d";
    case Variant::mixed: return "mixed";
  }
  return "?";
}
inline Preset parse_preset(const std::string& s) {
  if (s == "paper") return Preset::paper;
  if (s == "tiny") return Preset::tiny;
  throw ArgumentError("unknown preset '" + s + "' (expected paper|tiny)");
}
inline Variant parse_variant(const std::string& s) {
  if (s == "r2plus1d") return Variant::r2plus1d;
  if (s == "full3d") return Variant::full3d;
  if (s == "mixed") return Variant::mixed;
  throw ArgumentError("unknown variant '" + s + "' (expected r2plus1d|full3d|mixed)");
}

struct ConvSpec {
  std::size_t in_channels = 0, out_channels = 0;
  Triple kernel, stride, padding{0, 0, 0};
};

// One conv position. Two convs form a factorized (spatial, temporal) pair with
// batch norm + ReLU between them; one conv is a plain 3D or 2D convolution.
struct ConvUnitSpec {
  std::vector<ConvSpec> convs;
  std::size_t in_channels() const { return convs.front().in_channels; }
  std::size_t out_channels() const { return convs.back().out_channels; }
};

struct ResidualBlockSpec {
  std::string name;   // parameter prefix, e.g. "layer2.0"
  std::string group;  // table row label, e.g. "Conv Block 2"
  ConvUnitSpec first, second;
  std::optional<ConvSpec> shortcut;  // 1x1x1 projection; identity when absent
  std::string shortcut_group;
};

struct EncoderSpec {
  Preset preset = Preset::paper;
  Variant variant = Variant::r2plus1d;
  std::array<std::size_t, 4> input_shape{3, 16, 224, 224};  // C, T, H, W
  std::string stem_group = "Conv Block 1";
  ConvUnitSpec stem;
  std::vector<ResidualBlockSpec> blocks;
  std::size_t embedding_dim = 512;
  std::string pool_group = "Ada. Ave. Pool";
};

namespace detail {

inline ConvUnitSpec make_unit(Variant kind, std::size_t in, std::size_t out, std::size_t stride,
                              std::size_t mid) {
  switch (kind) {
    case Variant::r2plus1d:
      return {{ConvSpec{in, mid, {1, 3, 3}, {1, stride, stride}, {0, 1, 1}},
               ConvSpec{mid, out, {3, 1, 1}, {stride, 1, 1}, {1, 0, 0}}}};
    case Variant::full3d:
      return {{ConvSpec{in, out, {3, 3, 3}, {stride, stride, stride}, {1, 1, 1}}}};
    case Variant::mixed:  // 2D: no temporal extent, no temporal stride
      return {{ConvSpec{in, out, {1, 3, 3}, {1, stride, stride}, {0, 1, 1}}}};
  }
  return {};
}

}  // namespace detail

// Builds the declarative schedule. The paper preset is the 18-layer R(2+1)D
// layout: stem, then four stages of two residual blocks with widths
// 64/128/256/512, the last three stages downsampling time and space by 2.
inline EncoderSpec make_encoder_spec(Preset preset, Variant variant = Variant::r2plus1d) {
  EncoderSpec spec;
  spec.preset = preset;
  spec.variant = variant;
  const std::array<std::size_t, 4> widths =
      preset == Preset::paper ? std::array<std::size_t, 4>{64, 128, 256, 512}
                              : std::array<std::size_t, 4>{8, 16, 32, 64};
  spec.input_shape = preset == Preset::paper ? std::array<std::size_t, 4>{3, 16, 224, 224}
                                             : std::array<std::size_t, 4>{3, 8, 32, 32};
  spec.embedding_dim = widths[3];

  const std::size_t in_ch = spec.input_shape[0];
  if (variant == Variant::r2plus1d) {
    // Table width for the paper stem; the formula otherwise.
    const std::size_t stem_mid =
        preset == Preset::paper ? 45 : intermediate_channels(in_ch, widths[0], 3, 7);
    spec.stem.convs = {ConvSpec{in_ch, stem_mid, {1, 7, 7}, {1, 2, 2}, {0, 3, 3}},
                       ConvSpec{stem_mid, widths[0], {3, 1, 1}, {1, 1, 1}, {1, 0, 0}}};
  } else {
    spec.stem.convs = {ConvSpec{in_ch, widths[0], {3, 7, 7}, {1, 2, 2}, {1, 3, 3}}};
  }

  std::size_t in = widths[0];
  for (std::size_t stage = 0; stage < 4; ++stage) {
    const std::size_t out = widths[stage];
    const std::size_t stride = stage == 0 ? 1 : 2;
    const Variant kind =
        variant == Variant::mixed ? (stage == 0 ? Variant::full3d : Variant::mixed) : variant;
    for (std::size_t b = 0; b < 2; ++b) {
      ResidualBlockSpec block;
      block.name = "layer" + std::to_string(stage + 1) + "." + std::to_string(b);
      block.group = "Conv Block " + std::to_string(stage == 0 ? 1 : 2 * stage + b);
      const std::size_t block_in = b == 0 ? in : out;
      const std::size_t block_stride = b == 0 ? stride : 1;
      const std::size_t mid = intermediate_channels(block_in, out, 3, 3);
      block.first = detail::make_unit(kind, block_in, out, block_stride, mid);
      block.second = detail::make_unit(kind, out, out, 1, mid);
      if (block_in != out || block_stride != 1) {
        const std::size_t ts = kind == Variant::mixed ? 1 : block_stride;
        block.shortcut = ConvSpec{block_in, out, {1, 1, 1}, {ts, block_stride, block_stride}, {0, 0, 0}};
        block.shortcut_group = "Residual layer " + std::to_string(stage);
      }
      spec.blocks.push_back(std::move(block));
    }
    in = out;
  }
  return spec;
}

inline void validate(const EncoderSpec& spec) {
  auto check_conv = [](const ConvSpec& c, const std::string& where) {
    if (c.in_channels == 0 || c.out_channels == 0)
      throw BuildError(where + ": channel counts must be >= 1");
    for (std::size_t k : {c.kernel.t, c.kernel.h, c.kernel.w})
      if (k == 0 || k % 2 == 0) throw BuildError(where + ": kernel dims must be odd and positive");
    for (std::size_t s : {c.stride.t, c.stride.h, c.stride.w})
      if (s == 0) throw BuildError(where + ": strides must be positive");
  };
  auto check_unit = [&](const ConvUnitSpec& u, std::size_t in, const std::string& where) {
    if (u.convs.empty() || u.convs.size() > 2) throw BuildError(where + ": unit needs 1 or 2 convs");
    for (std::size_t i = 0; i < u.convs.size(); ++i) {
      check_conv(u.convs[i], where);
      if (u.convs[i].in_channels != in)
        throw BuildError(where + ": expects " + std::to_string(u.convs[i].in_channels) +
                         " input channels but receives " + std::to_string(in));
      in = u.convs[i].out_channels;
    }
    return in;
  };
  if (spec.input_shape[0] == 0 || spec.input_shape[1] == 0 || spec.input_shape[2] == 0 ||
      spec.input_shape[3] == 0)
    throw BuildError("input shape must be positive");
  std::size_t ch = check_unit(spec.stem, spec.input_shape[0], "stem");
  for (const auto& b : spec.blocks) {
    const std::size_t in = ch;
    const std::size_t mid = check_unit(b.first, in, b.name + ".first");
    ch = check_unit(b.second, mid, b.name + ".second");
    const bool identity_ok = in == ch && b.first.convs.front().stride == Triple{1, 1, 1} &&
                             b.first.convs.back().stride == Triple{1, 1, 1};
    if (b.shortcut) {
      check_conv(*b.shortcut, b.name + ".shortcut");
      if (b.shortcut->in_channels != in || b.shortcut->out_channels != ch)
        throw BuildError(b.name + ".shortcut: channel mismatch");
    } else if (!identity_ok) {
      throw BuildError(b.name + ": identity shortcut across a channel or resolution change");
    }
  }
  if (ch != spec.embedding_dim)
    throw BuildError("final width " + std::to_string(ch) + " != embedding_dim " +
                     std::to_string(spec.embedding_dim));
}

// ---- serialization and digest --------------------------------------------

inline nlohmann::json to_json(const ConvSpec& c) {
  return {{"in", c.in_channels},
          {"out", c.out_channels},
          {"kernel", {c.kernel.t, c.kernel.h, c.kernel.w}},
          {"stride", {c.stride.t, c.stride.h, c.stride.w}},
          {"padding", {c.padding.t, c.padding.h, c.padding.w}}};
}

inline nlohmann::json to_json(const ConvUnitSpec& u) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : u.convs) arr.push_back(to_json(c));
  return arr;
}

inline nlohmann::json to_json(const EncoderSpec& spec) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : spec.blocks) {
    nlohmann::json jb{{"name", b.name},
                      {"group", b.group},
                      {"first", to_json(b.first)},
                      {"second", to_json(b.second)}};
    if (b.shortcut) {
      jb["shortcut"] = to_json(*b.shortcut);
      jb["shortcut_group"] = b.shortcut_group;
    }
    blocks.push_back(std::move(jb));
  }
  return {{"preset", to_string(spec.preset)},
          {"variant", to_string(spec.variant)},
          {"input_shape", spec.input_shape},
          {"stem_group", spec.stem_group},
          {"stem", to_json(spec.stem)},
          {"blocks", std::move(blocks)},
          {"embedding_dim", spec.embedding_dim},
          {"pool_group", spec.pool_group}};
}

inline ConvSpec conv_from_json(const nlohmann::json& j) {
  auto triple = [](const nlohmann::json& a) {
    return Triple{a.at(0).get<std::size_t>(), a.at(1).get<std::size_t>(), a.at(2).get<std::size_t>()};
  };
  return ConvSpec{j.at("in").get<std::size_t>(), j.at("out").get<std::size_t>(),
                  triple(j.at("kernel")), triple(j.at("stride")), triple(j.at("padding"))};
}

inline ConvUnitSpec unit_from_json(const nlohmann::json& j) {
  ConvUnitSpec u;
  for (const auto& c : j) u.convs.push_back(conv_from_json(c));
  return u;
}

inline EncoderSpec encoder_spec_from_json(const nlohmann::json& j) {
  try {
    EncoderSpec spec;
    spec.preset = parse_preset(j.at("preset").get<std::string>());
    spec.variant = parse_variant(j.at("variant").get<std::string>());
    spec.input_shape = j.at("input_shape").get<std::array<std::size_t, 4>>();
    spec.stem_group = j.at("stem_group").get<std::string>();
    spec.stem = unit_from_json(j.at("stem"));
    for (const auto& jb : j.at("blocks")) {
      ResidualBlockSpec b;
      b.name = jb.at("name").get<std::string>();
      b.group = jb.at("group").get<std::string>();
      b.first = unit_from_json(jb.at("first"));
      b.second = unit_from_json(jb.at("second"));
      if (jb.contains("shortcut")) {
        b.shortcut = conv_from_json(jb.at("shortcut"));
        b.shortcut_group = jb.at("shortcut_group").get<std::string>();
      }
      spec.blocks.push_back(std::move(b));
    }
    spec.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    spec.pool_group = j.at("pool_group").get<std::string>();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw BuildError(std::string("malformed encoder spec: ") + e.what());
  }
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Architecture fingerprint stored in checkpoints.
inline std::uint64_t digest(const EncoderSpec& spec) { return fnv1a64(to_json(spec).dump()); }

// ---- shape inference and the layer table ---------------------------------

struct LayerRow {
  std::string group;
  std::string name;
  std::size_t unit = 0;  // rows of one conv position share an id
  std::array<std::size_t, 4> output{};  // C, T, H, W
  std::size_t kernel_count = 0;
  Triple kernel;
  bool is_pool = false;
};

inline std::array<std::size_t, 4> conv_output(const ConvSpec& c, const std::array<std::size_t, 4>& in) {
  return {c.out_channels, nn::conv_output_extent(in[1], c.kernel.t, c.stride.t, c.padding.t),
          nn::conv_output_extent(in[2], c.kernel.h, c.stride.h, c.padding.h),
          nn::conv_output_extent(in[3], c.kernel.w, c.stride.w, c.padding.w)};
}

// Every convolution (and the final pool) in forward order with its output
// size, for an input of spec.input_shape.
inline std::vector<LayerRow> layer_rows(const EncoderSpec& spec) {
  validate(spec);
  std::vector<LayerRow> rows;
  std::size_t unit = 0;
  auto emit_unit = [&](const ConvUnitSpec& u, const std::string& group, const std::string& name,
                       std::array<std::size_t, 4> shape) {
    static const char* kParts[] = {"spatial", "temporal"};
    for (std::size_t i = 0; i < u.convs.size(); ++i) {
      shape = conv_output(u.convs[i], shape);
      rows.push_back({group, u.convs.size() == 2 ? name + "." + kParts[i] : name, unit, shape,
                      u.convs[i].out_channels, u.convs[i].kernel, false});
    }
    ++unit;
    return shape;
  };
  auto shape = emit_unit(spec.stem, spec.stem_group, "stem", spec.input_shape);
  for (const auto& b : spec.blocks) {
    const auto in = shape;
    shape = emit_unit(b.first, b.group, b.name + ".first", shape);
    shape = emit_unit(b.second, b.group, b.name + ".second", shape);
    if (b.shortcut) {
      const auto s = conv_output(*b.shortcut, in);
      if (s != shape) throw BuildError(b.name + ": shortcut output does not match the block output");
      rows.push_back({b.shortcut_group, b.name + ".shortcut", unit++, s, b.shortcut->out_channels,
                      b.shortcut->kernel, false});
    }
  }
  rows.push_back({spec.pool_group, "pool", unit, {shape[0], 1, 1, 1}, 0, {}, true});
  return rows;
}

// Printed table row: consecutive identical conv positions within a group are
// collapsed into one set of rows with a repeat count.
struct TableRow {
  std::string layer;
  std::string output;
  std::size_t repeat = 1;
  std::string kernel;
  friend bool operator==(const TableRow&, const TableRow&) = default;
};

inline std::string size_str(const std::array<std::size_t, 4>& s) {
  std::ostringstream os;
  os << '[' << s[0] << ", " << s[1] << ", " << s[2] << ", " << s[3] << ']';
  return os.str();
}

inline std::vector<TableRow> architecture_table(const EncoderSpec& spec) {
  const auto rows = layer_rows(spec);
  auto to_table = [](const LayerRow& r) {
    return TableRow{r.group, size_str(r.output), 1,
                    r.is_pool ? std::string() : std::to_string(r.kernel_count) + ", " + nn::triple_str(r.kernel)};
  };
  // Split into conv positions.
  std::vector<std::vector<TableRow>> units;
  std::vector<std::string> unit_group;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i == 0 || rows[i].unit != rows[i - 1].unit) {
      units.emplace_back();
      unit_group.push_back(rows[i].group);
    }
    units.back().push_back(to_table(rows[i]));
  }
  std::vector<TableRow> out;
  for (std::size_t i = 0; i < units.size();) {
    std::size_t j = i + 1;
    while (j < units.size() && unit_group[j] == unit_group[i] && units[j] == units[i]) ++j;
    for (TableRow r : units[i]) {
      r.repeat = j - i;
      out.push_back(std::move(r));
    }
    i = j;
  }
  return out;
}

inline std::string render_table(const std::vector<TableRow>& rows, bool csv) {
  std::ostringstream os;
  if (csv) {
    os << "layer,output_size,repeat,kernel\n";
    for (const auto& r : rows)
      os << '"' << r.layer << "\",\"" << r.output << "\"," << (r.repeat > 1 ? "x" + std::to_string(r.repeat) : "")
         << ",\"" << r.kernel << "\"\n";
    return os.str();
  }
  std::size_t w0 = 10, w1 = 11;
  for (const auto& r : rows) {
    w0 = std::max(w0, r.layer.size());
    w1 = std::max(w1, r.output.size());
  }
  auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); };
  os << pad("Layer Name", w0) << "  " << pad("Output size", w1) << "  " << pad("", 4) << "  "
     << "Kernel size\n";
  for (const auto& r : rows)
    os << pad(r.layer, w0) << "  " << pad(r.output, w1) << "  "
       << pad(r.repeat > 1 ? "x" + std::to_string(r.repeat) : "", 4) << "  " << r.kernel << '\n';
  return os.str();
}

inline std::uint64_t conv_weight_count(const ConvSpec& c) {
  return c.in_channels * c.out_channels * c.kernel.t * c.kernel.h * c.kernel.w;
}

}  // namespace stclr::encoder
