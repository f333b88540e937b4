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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "stclr/augment/views.hpp"
#include "stclr/contrastive/nt_xent.hpp"
#include "stclr/core/dataset.hpp"
#include "stclr/encoder/network.hpp"
#include "stclr/nn/ops.hpp"
#include "stclr/nn/optim.hpp"
#include "stclr/parallel.hpp"
#include "stclr/trainer/checkpoint.hpp"
#include "stclr/trainer/config.hpp"
#include "stclr/trainer/log.hpp"
#include "stclr/trainer/metrics.hpp"

namespace stclr::trainer {

using nn::NormMode;
using nn::Var;

// Stream tags for derive_seed.
enum SeedTag : std::uint64_t {
  kEncoderInit = 1,
  kPretrainOrder = 2,
  kPretrainViews = 3,
  kClassifierInit = 4,
  kFinetuneOrder = 5,
  kFolds = 6,
  kLabelSubset = 7,
};

// Decodes every clip of the index once; later subsets share the frames.
inline DatasetIndex materialize(DatasetIndex index, std::size_t workers) {
  parallel_for(index.size(), workers, [&](std::size_t i) {
    auto& d = index.clips[i];
    if (!d.materialized) d.materialized = std::make_shared<const VideoClip>(load_clip(d));
  });
  return index;
}

inline const VideoClip& clip_of(const ClipDescriptor& d) {
  if (!d.materialized) throw Error("clip '" + d.id + "' was not materialized");
  return *d.materialized;
}

// Copies rows `positions` of a [N, ...] tensor.
template <typename T>
nn::Tensor<T> gather_rows(const nn::Tensor<T>& src, const std::vector<std::size_t>& positions) {
  nn::Shape shape = src.shape();
  const std::size_t row = src.numel() / shape[0];
  shape[0] = positions.size();
  nn::Tensor<T> out(shape);
  for (std::size_t i = 0; i < positions.size(); ++i)
    std::copy_n(src.data() + positions[i] * row, row, out.data() + i * row);
  return out;
}

// Deterministic evaluation inputs [N, 3, T, H, W] for every clip.
inline nn::Tensor<float> evaluation_inputs(const DatasetIndex& index, const encoder::EncoderSpec& spec,
                                           std::size_t workers) {
  const auto in = spec.input_shape;
  std::vector<augment::SubVideo> views(index.size());
  parallel_for(index.size(), workers,
               [&](std::size_t i) { views[i] = augment::evaluation_view(clip_of(index.clips[i]), in[1], in[2], in[3]); });
  std::vector<const augment::SubVideo*> ptrs;
  for (const auto& v : views) ptrs.push_back(&v);
  return augment::to_batch<float>(ptrs);
}

inline std::vector<std::size_t> labels_of(const DatasetIndex& index) {
  std::vector<std::size_t> out;
  for (const auto& d : index.clips) out.push_back(d.label);
  return out;
}

// Shuffled minibatches; a trailing batch smaller than `min_size` is merged
// into the previous one.
inline std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size, std::size_t min_size,
                                                          Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < n; i += batch_size)
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(n, i + batch_size)));
  if (batches.size() > 1 && batches.back().size() < min_size) {
    auto tail = std::move(batches.back());
    batches.pop_back();
    batches.back().insert(batches.back().end(), tail.begin(), tail.end());
  }
  return batches;
}

// ---------------------------------------------------------------- pretrain

struct PretrainOptions {
  std::vector<std::size_t> snapshot_epochs;  // keep in-memory checkpoints at these epochs
  std::filesystem::path checkpoint_dir;  // empty: do not write checkpoint files
};

struct PretrainResult {
  Checkpoint checkpoint;  // final epoch
  std::vector<double> epoch_losses;
  std::map<std::size_t, Checkpoint> snapshots;
};

inline Checkpoint pretrain_checkpoint(encoder::Encoder<float>& enc, const encoder::ProjectionHead<float>& head,
                                      std::size_t epoch, std::uint64_t seed) {
  Checkpoint ck;
  ck.kind = "pretrain";
  ck.digest = encoder::digest(enc.spec());
  ck.epoch = epoch;
  ck.encoder_json = encoder::to_json(enc.spec()).dump();
  ck.rng_state = "derived:" + std::to_string(seed);
  append_parameters(ck, enc.parameters(), true);
  append_buffers(ck, enc.buffers());
  append_parameters(ck, head.parameters(), true);
  return ck;
}

inline std::string epoch_checkpoint_name(std::size_t epoch) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "pretrain_epoch%05zu.ckpt", epoch);
  return buf;
}

// Contrastive pretraining. Labels are never read: batch order and view draws
// depend only on the seed, the epoch and the clip's position in the index.
inline PretrainResult pretrain(const RunConfig& c, const DatasetIndex& data, TrainingLog& log,
                               const PretrainOptions& opts = {}) {
  validate(c);
  if (data.size() < 2) throw ConfigError("pretraining needs at least 2 clips per batch; the dataset has " +
                                         std::to_string(data.size()));
  for (auto e : opts.snapshot_epochs)
    if (e < 1 || e > c.pretrain.epochs)
      throw ArgumentError("snapshot epoch " + std::to_string(e) + " is outside 1.." + std::to_string(c.pretrain.epochs));
  const auto spec = c.encoder_spec();
  const auto sampler = c.sampler();
  const auto spatial = c.spatial_spec();
  const std::size_t workers = c.worker_count();

  Rng init(derive_seed(c.seed, {kEncoderInit}));
  encoder::Encoder<float> enc(spec, init);
  encoder::ProjectionHead<float> head(encoder::projection_for(spec), init);
  auto params = enc.parameters();
  for (const auto& p : head.parameters()) params.push_back(p);
  nn::SgdMomentum<float> opt(params, {c.pretrain.lr, c.pretrain.momentum, c.pretrain.weight_decay});

  PretrainResult result;
  std::size_t step = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t epoch = 1; epoch <= c.pretrain.epochs; ++epoch) {
    Rng order(derive_seed(c.seed, {kPretrainOrder, epoch}));
    const auto batches = make_batches(data.size(), c.pretrain.batch_size, 2, order);
    double loss_sum = 0;
    for (const auto& batch : batches) {
      std::vector<std::pair<augment::SubVideo, augment::SubVideo>> views(batch.size());
      parallel_for(batch.size(), workers, [&](std::size_t i) {
        Rng view_rng(derive_seed(c.seed, {kPretrainViews, epoch, batch[i]}));
        views[i] = augment::make_views(clip_of(data.clips[batch[i]]), sampler, spatial, view_rng);
      });
      std::vector<const augment::SubVideo*> ptrs;
      for (const auto& [a, b] : views) {
        ptrs.push_back(&a);
        ptrs.push_back(&b);
      }
      auto x = Var<float>::constant(augment::to_batch<float>(ptrs));
      auto z = head.forward(enc.forward(x, NormMode::train));
      auto loss = contrastive::nt_xent(z, contrastive::interleaved_pairs(ptrs.size()), c.tau);
      opt.zero_grad();
      nn::backward(loss);
      opt.step();
      const double l = loss.value().item();
      loss_sum += l;
      log.record({{"phase", "pretrain"}, {"epoch", epoch}, {"step", ++step}, {"loss", l}, {"lr", opt.lr()}});
    }
    const double mean = loss_sum / static_cast<double>(batches.size());
    result.epoch_losses.push_back(mean);
    log.record({{"phase", "pretrain"}, {"event", "epoch_end"}, {"epoch", epoch}, {"loss", mean}, {"lr", opt.lr()}});
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log.note("pretrain epoch " + std::to_string(epoch) + "/" + std::to_string(c.pretrain.epochs) +
             " loss " + std::to_string(mean) + " (" + std::to_string(elapsed) + " s)");

    const bool snapshot = std::find(opts.snapshot_epochs.begin(), opts.snapshot_epochs.end(), epoch) !=
                          opts.snapshot_epochs.end();
    const bool periodic = c.pretrain.checkpoint_every && epoch % c.pretrain.checkpoint_every == 0;
    const bool last = epoch == c.pretrain.epochs;
    if (snapshot || periodic || last) {
      auto ck = pretrain_checkpoint(enc, head, epoch, c.seed);
      if (!opts.checkpoint_dir.empty() && (periodic || snapshot))
        save_checkpoint(ck, opts.checkpoint_dir / epoch_checkpoint_name(epoch));
      if (snapshot) result.snapshots[epoch] = ck;
      if (last) result.checkpoint = std::move(ck);
    }
  }
  if (!opts.checkpoint_dir.empty()) save_checkpoint(result.checkpoint, opts.checkpoint_dir / "pretrain.ckpt");
  return result;
}

// ---------------------------------------------------------------- classifier

// Pretrained encoder followed by a single linear layer.
struct Classifier {
  encoder::Encoder<float> encoder;
  nn::Dense<float> head;

  Var<float> forward(const Var<float>& x, NormMode mode) { return head(encoder.forward(x, mode)); }

  std::vector<nn::Parameter<float>> parameters() const {
    auto out = encoder.parameters();
    head.collect(out);
    return out;
  }
  std::size_t classes() const { return head.out_features(); }
};

inline Classifier make_classifier(const encoder::EncoderSpec& spec, std::size_t classes, std::uint64_t seed) {
  Rng init(derive_seed(seed, {kEncoderInit}));
  encoder::Encoder<float> enc(spec, init);
  Rng head_rng(derive_seed(seed, {kClassifierInit}));
  nn::Dense<float> head("classifier", spec.embedding_dim, classes, head_rng);
  return {std::move(enc), std::move(head)};
}

inline Checkpoint classifier_checkpoint(Classifier& m, std::size_t epoch, std::uint64_t seed) {
  Checkpoint ck;
  ck.kind = "finetune";
  ck.digest = encoder::digest(m.encoder.spec());
  ck.epoch = epoch;
  ck.encoder_json = encoder::to_json(m.encoder.spec()).dump();
  ck.rng_state = "derived:" + std::to_string(seed);
  append_parameters(ck, m.parameters(), false);
  append_buffers(ck, m.encoder.buffers());
  return ck;
}

inline Classifier classifier_from_checkpoint(const Checkpoint& ck) {
  if (ck.kind != "finetune") throw CheckpointError("expected a fine-tuned checkpoint, got '" + ck.kind + "'");
  const auto spec = checkpoint_encoder_spec(ck);
  require_digest(ck, spec);
  const auto* w = ck.find("classifier.weight");
  if (!w || w->value.rank() != 2) throw CheckpointError("checkpoint lacks the classifier layer");
  Classifier m = make_classifier(spec, w->value.dim(0), 0);
  auto params = m.parameters();
  restore_parameters(ck, params, false);
  restore_buffers(ck, m.encoder.buffers());
  return m;
}

struct Prediction {
  std::vector<std::size_t> labels;
  double loss = 0;
};

// Eval-mode logits for precomputed inputs, batch by batch.
inline Prediction predict(Classifier& m, const nn::Tensor<float>& inputs, const std::vector<std::size_t>& truth,
                          std::size_t batch_size) {
  nn::NoGrad guard;
  Prediction p;
  const std::size_t n = inputs.dim(0);
  double loss_sum = 0;
  for (std::size_t i = 0; i < n; i += batch_size) {
    std::vector<std::size_t> rows(std::min(batch_size, n - i));
    std::iota(rows.begin(), rows.end(), i);
    auto logits = m.forward(Var<float>::constant(gather_rows(inputs, rows)), NormMode::eval);
    std::vector<std::size_t> labels;
    for (auto r : rows) labels.push_back(truth[r]);
    loss_sum += nn::softmax_cross_entropy(logits, labels).value().item() * static_cast<double>(rows.size());
    const std::size_t c = logits.shape()[1];
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const float* row = logits.value().data() + r * c;
      p.labels.push_back(static_cast<std::size_t>(std::max_element(row, row + c) - row));
    }
  }
  p.loss = loss_sum / static_cast<double>(n);
  return p;
}

// Eval-mode inference with uniform temporal sampling and a centred crop.
inline Metrics evaluate(Classifier& m, const DatasetIndex& test, const RunConfig& c) {
  require(!test.empty(), "evaluate: empty test split");
  const auto start = std::chrono::steady_clock::now();
  const auto inputs = evaluation_inputs(test, m.encoder.spec(), c.worker_count());
  const auto truth = labels_of(test);
  auto p = predict(m, inputs, truth, std::max<std::size_t>(1, c.finetune.batch_size));
  Metrics metrics = score_predictions(truth, p.labels, m.classes());
  metrics.loss = p.loss;
  metrics.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return metrics;
}

// ---------------------------------------------------------------- finetune

struct FinetuneOptions {
  // Diagnostic: discard all gradients so only the scheduler acts.
  bool frozen_gradients = false;
};

struct FinetuneResult {
  Classifier model;
  Metrics validation;  // of the retained (best) model
  std::size_t best_epoch = 0;  // 0: the untrained initial state
  std::vector<double> train_losses;
  std::vector<double> learning_rates;  // lr used in each epoch
};

namespace detail {

struct Snapshot {
  std::vector<nn::Tensor<float>> params;
  std::vector<nn::Tensor<float>> buffers;
};

inline Snapshot take_snapshot(Classifier& m) {
  Snapshot s;
  for (const auto& p : m.parameters()) s.params.push_back(p.value());
  for (const auto& b : m.encoder.buffers()) s.buffers.push_back(*b.tensor);
  return s;
}

inline void restore_snapshot(Classifier& m, const Snapshot& s) {
  auto params = m.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i].value() = s.params[i];
  auto buffers = m.encoder.buffers();
  for (std::size_t i = 0; i < buffers.size(); ++i) *buffers[i].tensor = s.buffers[i];
}

}  // namespace detail

// Drops the projection head, trains a fresh linear layer on the frozen
// encoder (batch norm in eval mode), then trains everything. Adam with
// plateau decay on validation loss; the best validation model is kept.
inline FinetuneResult finetune(const Checkpoint& pretrained, const RunConfig& c, const DatasetIndex& train,
                               const DatasetIndex& val, TrainingLog& log, const FinetuneOptions& opts = {}) {
  validate(c);
  require(!train.empty() && !val.empty(), "finetune: empty train or validation split");
  const auto spec = c.encoder_spec();
  require_digest(pretrained, spec);
  const std::size_t classes = train.taxonomy.count();
  const std::size_t workers = c.worker_count();
  const std::size_t bs = c.finetune.batch_size;

  FinetuneResult result{make_classifier(spec, classes, c.seed), {}, 0, {}, {}};
  Classifier& m = result.model;
  {
    auto enc_params = m.encoder.parameters();
    restore_parameters(pretrained, enc_params, false);
    restore_buffers(pretrained, m.encoder.buffers());
  }

  const auto train_x = evaluation_inputs(train, spec, workers);
  const auto val_x = evaluation_inputs(val, spec, workers);
  const auto train_y = labels_of(train);
  const auto val_y = labels_of(val);

  auto validate_model = [&]() {
    auto p = predict(m, val_x, val_y, bs);
    Metrics metrics = score_predictions(val_y, p.labels, classes);
    metrics.loss = p.loss;
    return metrics;
  };

  Metrics best = validate_model();
  detail::Snapshot best_state = detail::take_snapshot(m);
  std::size_t epoch = 0;

  auto finish_epoch = [&](const char* phase, double train_loss, double lr, nn::PlateauScheduler& sched,
                          auto& optimizer) {
    Metrics v = validate_model();
    result.train_losses.push_back(train_loss);
    result.learning_rates.push_back(lr);
    const double next_lr = sched.step(v.loss);
    optimizer.set_lr(next_lr);
    log.record({{"phase", phase}, {"epoch", epoch}, {"loss", train_loss}, {"val_loss", v.loss},
                {"val_accuracy", v.accuracy}, {"lr", lr}});
    log.note(std::string(phase) + " epoch " + std::to_string(epoch) + " loss " + std::to_string(train_loss) +
             " val_acc " + std::to_string(v.accuracy) + " lr " + std::to_string(lr));
    if (v.accuracy > best.accuracy || (v.accuracy == best.accuracy && v.loss < best.loss)) {
      best = v;
      best_state = detail::take_snapshot(m);
      result.best_epoch = epoch;
    }
  };

  auto apply_frozen = [&](std::vector<nn::Parameter<float>>& params) {
    if (opts.frozen_gradients)
      for (auto& p : params) p.zero_grad();
  };

  // Phase 1: linear probe on cached features.
  if (c.finetune.linear_epochs > 0) {
    auto enc_params = m.encoder.parameters();
    for (auto& p : enc_params) p.set_trainable(false);
    nn::Tensor<float> features({train_x.dim(0), spec.embedding_dim});
    for (std::size_t i = 0; i < train_x.dim(0); i += bs) {
      std::vector<std::size_t> rows(std::min(bs, train_x.dim(0) - i));
      std::iota(rows.begin(), rows.end(), i);
      auto h = encoder::encode(m.encoder, gather_rows(train_x, rows), NormMode::eval);
      std::copy_n(h.data(), h.numel(), features.data() + i * spec.embedding_dim);
    }
    std::vector<nn::Parameter<float>> head_params;
    m.head.collect(head_params);
    nn::Adam<float> opt(head_params, {c.finetune.lr});
    nn::PlateauScheduler sched(c.finetune.lr, c.finetune.patience, c.finetune.factor, 1e-4, c.finetune.min_lr);
    for (std::size_t e = 1; e <= c.finetune.linear_epochs; ++e) {
      ++epoch;
      Rng order(derive_seed(c.seed, {kFinetuneOrder, 1, e}));
      double loss_sum = 0;
      const auto batches = make_batches(features.dim(0), bs, 1, order);
      const double lr = opt.lr();
      for (const auto& batch : batches) {
        std::vector<std::size_t> labels;
        for (auto r : batch) labels.push_back(train_y[r]);
        auto loss = nn::softmax_cross_entropy(m.head(Var<float>::constant(gather_rows(features, batch))), labels);
        opt.zero_grad();
        nn::backward(loss);
        apply_frozen(head_params);
        opt.step();
        loss_sum += loss.value().item();
      }
      finish_epoch("linear", loss_sum / static_cast<double>(batches.size()), lr, sched, opt);
    }
    for (auto& p : enc_params) p.set_trainable(true);
  }

  // Phase 2: the whole network.
  if (c.finetune.full_epochs > 0) {
    log.record({{"phase", "full"}, {"event", "unfreeze"}, {"epoch", epoch + 1}});
    auto params = m.parameters();
    nn::Adam<float> opt(params, {c.finetune.lr});
    nn::PlateauScheduler sched(c.finetune.lr, c.finetune.patience, c.finetune.factor, 1e-4, c.finetune.min_lr);
    for (std::size_t e = 1; e <= c.finetune.full_epochs; ++e) {
      ++epoch;
      Rng order(derive_seed(c.seed, {kFinetuneOrder, 2, e}));
      double loss_sum = 0;
      const auto batches = make_batches(train_x.dim(0), bs, 2, order);
      const double lr = opt.lr();
      for (const auto& batch : batches) {
        std::vector<std::size_t> labels;
        for (auto r : batch) labels.push_back(train_y[r]);
        auto loss = nn::softmax_cross_entropy(m.forward(Var<float>::constant(gather_rows(train_x, batch)), NormMode::train), labels);
        opt.zero_grad();
        nn::backward(loss);
        apply_frozen(params);
        opt.step();
        loss_sum += loss.value().item();
      }
      finish_epoch("full", loss_sum / static_cast<double>(batches.size()), lr, sched, opt);
    }
  }

  detail::restore_snapshot(m, best_state);
  result.validation = best;
  log.record({{"phase", "finetune"}, {"event", "best"}, {"epoch", result.best_epoch},
              {"val_accuracy", best.accuracy}, {"val_loss", best.loss}});
  return result;
}

}  // namespace stclr::trainer
