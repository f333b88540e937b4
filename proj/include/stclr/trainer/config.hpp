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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stclr/augment/spatial.hpp"
#include "stclr/augment/temporal.hpp"
#include "stclr/core/synthetic.hpp"
#include "stclr/encoder/spec.hpp"
#include "stclr/error.hpp"
#include "stclr/parallel.hpp"

namespace stclr::trainer {

using nlohmann::json;

struct DataConfig {
  std::string root;  // empty: generate the synthetic dataset in memory
  std::vector<std::string> classes;  // empty: default taxonomy
  SyntheticSpec synthetic;
};

struct AugToggles {
  bool temporal = true;
  bool crop = true;
  bool color = true;
  bool flip = true;

  bool any() const { return temporal || crop || color || flip; }
  friend bool operator==(const AugToggles&, const AugToggles&) = default;
};

struct PretrainConfig {
  double lr = 1e-3;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::size_t epochs = 1000;
  std::size_t batch_size = 16;
  std::size_t checkpoint_every = 0;  // 0: only the final checkpoint
};

struct FinetuneConfig {
  std::size_t linear_epochs = 30;
  std::size_t full_epochs = 70;
  double lr = 1e-4;
  int patience = 3;
  double factor = 0.1;
  double min_lr = 1e-7;
  std::size_t batch_size = 16;
};

struct FoldConfig {
  std::size_t k = 10;
  bool shared_pretrain = true;
};

struct RunConfig {
  std::uint64_t seed = 0;
  encoder::Preset preset = encoder::Preset::paper;
  encoder::Variant variant = encoder::Variant::r2plus1d;
  double tau = 0.5;
  std::string out = "runs/stclr";
  bool deterministic = false;
  std::size_t workers = 0;  // 0: STCLR_NUM_WORKERS or 1
  DataConfig data;
  augment::Strategy strategy = augment::Strategy::random_choice;
  augment::SpatialAugSpec spatial;
  AugToggles augment;
  PretrainConfig pretrain;
  FinetuneConfig finetune;
  FoldConfig folds;
  std::vector<std::size_t> study_epochs{100, 200, 500, 1000};
  std::vector<double> label_fractions{1.0, 0.75, 0.5, 0.25, 0.10};

  encoder::EncoderSpec encoder_spec() const { return encoder::make_encoder_spec(preset, variant); }

  // Sampler length and output size follow the encoder input.
  augment::SamplerSpec sampler() const {
    const auto in = encoder_spec().input_shape;
    return {in[1], augment.temporal ? strategy : augment::Strategy::uniform};
  }

  augment::SpatialAugSpec spatial_spec() const {
    const auto in = encoder_spec().input_shape;
    auto s = spatial;
    s.output_height = in[2];
    s.output_width = in[3];
    s.random_crop = augment.crop;
    s.color = augment.color;
    s.flip = augment.flip;
    return s;
  }

  std::size_t worker_count() const {
    if (deterministic) return 1;
    return workers ? workers : default_worker_count();
  }
};

inline void validate(const RunConfig& c) {
  require<ConfigError>(c.tau > 0, "tau must be positive");
  require<ConfigError>(c.pretrain.epochs >= 1, "pretrain.epochs must be at least 1");
  require<ConfigError>(c.pretrain.batch_size >= 2,
                       "pretrain.batch_size must be at least 2 clips (one clip gives a constant zero loss)");
  require<ConfigError>(c.pretrain.lr > 0 && c.finetune.lr > 0, "learning rates must be positive");
  require<ConfigError>(c.finetune.batch_size >= 1, "finetune.batch_size must be at least 1");
  require<ConfigError>(c.finetune.patience >= 1, "finetune.patience must be at least 1");
  require<ConfigError>(c.finetune.factor > 0 && c.finetune.factor < 1, "finetune.factor must lie in (0, 1)");
  require<ConfigError>(c.folds.k >= 2, "folds.k must be at least 2");
  require<ConfigError>(c.augment.any(), "at least one augmentation must be enabled: with all disabled both views are identical");
  try {
    augment::validate(c.spatial_spec());
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("spatial: ") + e.what());
  }
  for (double f : c.label_fractions)
    require<ConfigError>(f > 0 && f <= 1, "label fractions must lie in (0, 1]");
}

inline json to_json(const RunConfig& c) {
  const auto& s = c.data.synthetic;
  const auto& a = c.spatial;
  return {
      {"seed", c.seed},
      {"preset", encoder::to_string(c.preset)},
      {"variant", encoder::to_string(c.variant)},
      {"tau", c.tau},
      {"out", c.out},
      {"deterministic", c.deterministic},
      {"workers", c.workers},
      {"data",
       {{"root", c.data.root},
        {"classes", c.data.classes},
        {"synthetic",
         {{"classes", s.classes},
          {"subjects", s.subjects},
          {"videos_per_subject_per_class", s.videos_per_subject_per_class},
          {"frames", s.frames},
          {"height", s.height},
          {"width", s.width},
          {"seed", s.seed}}}}},
      {"sampler", {{"strategy", augment::to_string(c.strategy)}}},
      {"spatial",
       {{"area_min", a.area_min},
        {"area_max", a.area_max},
        {"aspect_min", a.aspect_min},
        {"aspect_max", a.aspect_max},
        {"flip_probability", a.flip_probability},
        {"brightness", a.brightness},
        {"contrast", a.contrast},
        {"saturation", a.saturation},
        {"hue", a.hue}}},
      {"augment",
       {{"temporal", c.augment.temporal}, {"crop", c.augment.crop}, {"color", c.augment.color}, {"flip", c.augment.flip}}},
      {"pretrain",
       {{"optimizer", "sgd-momentum"},
        {"lr", c.pretrain.lr},
        {"momentum", c.pretrain.momentum},
        {"weight_decay", c.pretrain.weight_decay},
        {"epochs", c.pretrain.epochs},
        {"batch_size", c.pretrain.batch_size},
        {"checkpoint_every", c.pretrain.checkpoint_every}}},
      {"finetune",
       {{"optimizer", "adam"},
        {"linear_epochs", c.finetune.linear_epochs},
        {"full_epochs", c.finetune.full_epochs},
        {"lr", c.finetune.lr},
        {"patience", c.finetune.patience},
        {"factor", c.finetune.factor},
        {"min_lr", c.finetune.min_lr},
        {"batch_size", c.finetune.batch_size}}},
      {"folds", {{"k", c.folds.k}, {"shared_pretrain", c.folds.shared_pretrain}}},
      {"epoch_study", {{"epochs", c.study_epochs}}},
      {"partial_labels", {{"fractions", c.label_fractions}}},
  };
}

namespace detail {

// Reads known keys of one object and rejects anything left over.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw ConfigError(where_ + ": expected an object");
  }
  ~ObjectReader() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + prefix() + key + "'");
  }

  template <typename V>
  void read(const char* key, V& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<V>();
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + prefix() + key + "': " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const char* key) const { return prefix() + key; }

  // Accepts only the given string value; used for fixed choices kept for documentation.
  void fixed(const char* key, const std::string& value) {
    std::string got = value;
    read(key, got);
    if (got != value) throw ConfigError("config key '" + prefix() + key + "' only supports \"" + value + "\"");
  }

 private:
  std::string prefix() const { return where_.empty() ? "" : where_ + "."; }
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace detail

// Overlays the keys present in `j` onto `c`.
inline void apply_json(RunConfig& c, const json& j) {
  detail::ObjectReader top(j, "");
  top.read("seed", c.seed);
  std::string preset = encoder::to_string(c.preset), variant = encoder::to_string(c.variant);
  top.read("preset", preset);
  top.read("variant", variant);
  try {
    c.preset = encoder::parse_preset(preset);
    c.variant = encoder::parse_variant(variant);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  top.read("tau", c.tau);
  top.read("out", c.out);
  top.read("deterministic", c.deterministic);
  top.read("workers", c.workers);
  if (auto* d = top.child("data")) {
    detail::ObjectReader r(*d, "data");
    r.read("root", c.data.root);
    r.read("classes", c.data.classes);
    if (auto* s = r.child("synthetic")) {
      detail::ObjectReader rs(*s, "data.synthetic");
      auto& sy = c.data.synthetic;
      rs.read("classes", sy.classes);
      rs.read("subjects", sy.subjects);
      rs.read("videos_per_subject_per_class", sy.videos_per_subject_per_class);
      rs.read("frames", sy.frames);
      rs.read("height", sy.height);
      rs.read("width", sy.width);
      rs.read("seed", sy.seed);
    }
  }
  if (auto* s = top.child("sampler")) {
    detail::ObjectReader r(*s, "sampler");
    std::string strategy = augment::to_string(c.strategy);
    r.read("strategy", strategy);
    try {
      c.strategy = augment::parse_strategy(strategy);
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }
  }
  if (auto* s = top.child("spatial")) {
    detail::ObjectReader r(*s, "spatial");
    auto& a = c.spatial;
    r.read("area_min", a.area_min);
    r.read("area_max", a.area_max);
    r.read("aspect_min", a.aspect_min);
    r.read("aspect_max", a.aspect_max);
    r.read("flip_probability", a.flip_probability);
    r.read("brightness", a.brightness);
    r.read("contrast", a.contrast);
    r.read("saturation", a.saturation);
    r.read("hue", a.hue);
  }
  if (auto* s = top.child("augment")) {
    detail::ObjectReader r(*s, "augment");
    r.read("temporal", c.augment.temporal);
    r.read("crop", c.augment.crop);
    r.read("color", c.augment.color);
    r.read("flip", c.augment.flip);
  }
  if (auto* s = top.child("pretrain")) {
    detail::ObjectReader r(*s, "pretrain");
    r.fixed("optimizer", "sgd-momentum");
    r.read("lr", c.pretrain.lr);
    r.read("momentum", c.pretrain.momentum);
    r.read("weight_decay", c.pretrain.weight_decay);
    r.read("epochs", c.pretrain.epochs);
    r.read("batch_size", c.pretrain.batch_size);
    r.read("checkpoint_every", c.pretrain.checkpoint_every);
  }
  if (auto* s = top.child("finetune")) {
    detail::ObjectReader r(*s, "finetune");
    r.fixed("optimizer", "adam");
    r.read("linear_epochs", c.finetune.linear_epochs);
    r.read("full_epochs", c.finetune.full_epochs);
    r.read("lr", c.finetune.lr);
    r.read("patience", c.finetune.patience);
    r.read("factor", c.finetune.factor);
    r.read("min_lr", c.finetune.min_lr);
    r.read("batch_size", c.finetune.batch_size);
  }
  if (auto* s = top.child("folds")) {
    detail::ObjectReader r(*s, "folds");
    r.read("k", c.folds.k);
    r.read("shared_pretrain", c.folds.shared_pretrain);
  }
  if (auto* s = top.child("epoch_study")) {
    detail::ObjectReader r(*s, "epoch_study");
    r.read("epochs", c.study_epochs);
  }
  if (auto* s = top.child("partial_labels")) {
    detail::ObjectReader r(*s, "partial_labels");
    r.read("fractions", c.label_fractions);
  }
}

inline RunConfig config_from_json(const json& j) {
  RunConfig c;
  apply_json(c, j);
  return c;
}

inline RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + file.string() + ": " + e.what());
  }
  return config_from_json(j);
}

inline void write_config(const RunConfig& c, const std::filesystem::path& file) {
  std::filesystem::create_directories(file.parent_path().empty() ? "." : file.parent_path());
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out << to_json(c).dump(2) << '\n';
}

}  // namespace stclr::trainer
