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

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "stclr/core/splits.hpp"
#include "stclr/trainer/train.hpp"

namespace stclr::trainer {

struct Split {
  DatasetIndex train;
  DatasetIndex val;
  DatasetIndex test;
};

// Test = fold f. Validation = fold f+1 (mod k) taken out of the training
// subjects; with k = 2 there is no spare fold and the training set doubles
// as validation.
inline Split fold_split(const DatasetIndex& index, const FoldPlan& plan, std::size_t fold) {
  require(fold < plan.k, "fold index out of range");
  Split s{index.subset(plan.train_positions(index, fold)), {}, index.subset(plan.test_positions(index, fold))};
  if (plan.k >= 3) {
    const std::size_t vf = (fold + 1) % plan.k;
    std::vector<std::size_t> train, val;
    for (std::size_t i = 0; i < s.train.size(); ++i)
      (plan.fold_of(s.train.clips[i].subject_id) == vf ? val : train).push_back(i);
    s.val = s.train.subset(val);
    s.train = s.train.subset(train);
  } else {
    s.val = s.train;
  }
  require<EmptyDatasetError>(!s.train.empty() && !s.val.empty() && !s.test.empty(), "fold split left a part empty");
  return s;
}

inline FoldPlan fold_plan(const RunConfig& c, const DatasetIndex& data) {
  return split_folds(data, c.folds.k, derive_seed(c.seed, {kFolds}));
}

struct FoldOutcome {
  std::size_t fold = 0;
  Metrics metrics;
  std::vector<std::string> test_clip_ids;
};

struct KfoldResult {
  std::vector<FoldOutcome> folds;
  Metrics summary;  // confusion summed over folds, accuracy = mean of fold accuracies
  bool shared_pretrain = true;
  double mean_accuracy() const { return summary.accuracy; }
};

// Shared mode pretrains once on every clip (labels unused) and reuses the
// encoder for all folds; otherwise each fold pretrains on its out-of-fold clips.
inline KfoldResult run_kfold(const RunConfig& c, const DatasetIndex& data, TrainingLog& log,
                             const Checkpoint* shared = nullptr) {
  validate(c);
  const auto plan = fold_plan(c, data);
  KfoldResult result;
  result.shared_pretrain = c.folds.shared_pretrain;
  std::optional<Checkpoint> pre;
  if (c.folds.shared_pretrain) {
    if (shared)
      pre = *shared;
    else
      pre = pretrain(c, data, log).checkpoint;
  }
  const std::size_t classes = data.taxonomy.count();
  result.summary.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  double acc_sum = 0;
  for (std::size_t f = 0; f < plan.k; ++f) {
    log.note("fold " + std::to_string(f + 1) + "/" + std::to_string(plan.k));
    const Split split = fold_split(data, plan, f);
    Checkpoint fold_pre = pre ? *pre : pretrain(c, data.subset(plan.train_positions(data, f)), log).checkpoint;
    auto tuned = finetune(fold_pre, c, split.train, split.val, log);
    FoldOutcome out;
    out.fold = f;
    out.metrics = evaluate(tuned.model, split.test, c);
    out.metrics.epoch_losses = tuned.train_losses;
    for (const auto& d : split.test.clips) out.test_clip_ids.push_back(d.id);
    for (std::size_t r = 0; r < classes; ++r)
      for (std::size_t k = 0; k < classes; ++k) result.summary.confusion[r][k] += out.metrics.confusion[r][k];
    acc_sum += out.metrics.accuracy;
    result.summary.fold_accuracies.push_back(out.metrics.accuracy);
    log.record({{"phase", "kfold"}, {"fold", f}, {"accuracy", out.metrics.accuracy}});
    result.folds.push_back(std::move(out));
  }
  result.summary.accuracy = acc_sum / static_cast<double>(plan.k);
  return result;
}

// ---------------------------------------------------------------- ablation

struct AblationRow {
  std::string name;
  AugToggles toggles;
  double accuracy = 0;
  std::vector<double> fold_accuracies;
};

inline std::vector<AblationRow> default_ablation_rows() {
  return {{"all", {true, true, true, true}, 0, {}},
          {"no_temporal", {false, true, true, true}, 0, {}},
          {"no_crop", {true, false, true, true}, 0, {}},
          {"no_color", {true, true, false, true}, 0, {}},
          {"no_flip", {true, true, true, false}, 0, {}}};
}

inline AblationRow ablation_row(const std::string& name) {
  for (const auto& r : default_ablation_rows())
    if (r.name == name) return r;
  throw ArgumentError("unknown ablation row '" + name + "'");
}

// One pretrain + k-fold fine-tune/evaluate cycle per row.
inline std::vector<AblationRow> run_ablation(const RunConfig& c, const DatasetIndex& data, std::vector<AblationRow> rows,
                                             TrainingLog& log) {
  require(!rows.empty(), "run_ablation: no rows");
  for (auto& row : rows) {
    if (!row.toggles.any()) throw ConfigError("ablation row '" + row.name + "' disables every augmentation");
    RunConfig rc = c;
    rc.augment = row.toggles;
    log.note("ablation row " + row.name);
    auto r = run_kfold(rc, data, log);
    row.accuracy = r.mean_accuracy();
    row.fold_accuracies = r.summary.fold_accuracies;
    log.record({{"phase", "ablation"}, {"row", row.name}, {"accuracy", row.accuracy}});
  }
  return rows;
}

inline void write_ablation_csv(const std::vector<AblationRow>& rows, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  auto mark = [](bool on) { return on ? "✓" : "✗"; };
  out << "row,temporal,random_resized_crop,color_distortion,random_flip,accuracy\n";
  for (const auto& r : rows)
    out << r.name << ',' << mark(r.toggles.temporal) << ',' << mark(r.toggles.crop) << ','
        << mark(r.toggles.color) << ',' << mark(r.toggles.flip) << ',' << r.accuracy << '\n';
}

// ---------------------------------------------------------------- epoch / label studies

struct StudyRow {
  double key = 0;  // SSL epochs or labelled fraction
  double accuracy = 0;
  std::vector<double> fold_accuracies;
};

// Pretrains once, keeping the encoder at each listed epoch, then runs the
// k-fold fine-tune/evaluate protocol from each of them.
inline std::vector<StudyRow> run_epoch_study(const RunConfig& c, const DatasetIndex& data,
                                             const std::vector<std::size_t>& epochs, TrainingLog& log) {
  require(!epochs.empty(), "epoch study: empty epoch list");
  for (auto e : epochs)
    if (e < 1 || e > c.pretrain.epochs)
      throw ArgumentError("epoch study: epoch " + std::to_string(e) + " exceeds the pretraining length " +
                          std::to_string(c.pretrain.epochs));
  PretrainOptions opts;
  opts.snapshot_epochs = epochs;
  auto pre = pretrain(c, data, log, opts);
  RunConfig rc = c;
  rc.folds.shared_pretrain = true;
  std::vector<StudyRow> rows;
  for (auto e : epochs) {
    auto r = run_kfold(rc, data, log, &pre.snapshots.at(e));
    rows.push_back({static_cast<double>(e), r.mean_accuracy(), r.summary.fold_accuracies});
  }
  return rows;
}

// Pretrains once on every clip, then fine-tunes each fold on a stratified
// fraction of its training clips. Validation and test folds are untouched.
inline std::vector<StudyRow> run_partial_label_study(const RunConfig& c, const DatasetIndex& data,
                                                     const std::vector<double>& fractions, TrainingLog& log) {
  require(!fractions.empty(), "partial-label study: empty fraction list");
  for (double f : fractions) require(f > 0 && f <= 1, "label fractions must lie in (0, 1]");
  const auto pre = pretrain(c, data, log).checkpoint;
  const auto plan = fold_plan(c, data);
  std::vector<StudyRow> rows;
  for (double fraction : fractions) {
    StudyRow row{fraction, 0, {}};
    for (std::size_t f = 0; f < plan.k; ++f) {
      Split split = fold_split(data, plan, f);
      split.train = label_subset(split.train, fraction, derive_seed(c.seed, {kLabelSubset, f}));
      auto tuned = finetune(pre, c, split.train, split.val, log);
      row.fold_accuracies.push_back(evaluate(tuned.model, split.test, c).accuracy);
    }
    double sum = 0;
    for (double a : row.fold_accuracies) sum += a;
    row.accuracy = sum / static_cast<double>(row.fold_accuracies.size());
    log.record({{"phase", "partial_labels"}, {"fraction", fraction}, {"accuracy", row.accuracy}});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_study_csv(const std::vector<StudyRow>& rows, const std::string& key_column,
                            const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out << key_column << ",accuracy\n";
  for (const auto& r : rows) out << r.key << ',' << r.accuracy << '\n';
}

}  // namespace stclr::trainer
