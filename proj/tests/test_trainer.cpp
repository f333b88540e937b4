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

#include <fstream>
#include <set>

#include "stclr/trainer/experiments.hpp"
#include "support/micro.hpp"
#include "support/temp_dir.hpp"

using namespace stclr;
using namespace stclr::trainer;
using stclr::testing::micro_config;
using stclr::testing::TempDir;

namespace {

DatasetIndex micro_data(const RunConfig& c) { return generate_synthetic(c.data.synthetic); }

const Checkpoint& micro_pretrained() {
  static const Checkpoint ck = [] {
    TrainingLog log;
    auto c = micro_config();
    return pretrain(c, micro_data(c), log).checkpoint;
  }();
  return ck;
}

DatasetIndex relabel(DatasetIndex index, std::size_t shift) {
  for (auto& d : index.clips) {
    d.label = (d.label + shift) % index.taxonomy.count();
    auto clip = *d.materialized;
    clip.label = d.label;
    d.materialized = std::make_shared<const VideoClip>(std::move(clip));
  }
  return index;
}

}  // namespace

TEST(Config, DefaultsFollowTheTrainingRecipe) {
  RunConfig c;
  EXPECT_EQ(c.pretrain.lr, 1e-3);
  EXPECT_EQ(c.pretrain.momentum, 0.9);
  EXPECT_EQ(c.pretrain.weight_decay, 1e-4);
  EXPECT_EQ(c.pretrain.epochs, 1000u);
  EXPECT_EQ(c.finetune.linear_epochs, 30u);
  EXPECT_EQ(c.finetune.full_epochs, 70u);
  EXPECT_EQ(c.finetune.lr, 1e-4);
  EXPECT_EQ(c.finetune.patience, 3);
  EXPECT_EQ(c.folds.k, 10u);
  EXPECT_EQ(c.sampler().n, 16u);
  EXPECT_EQ(c.spatial_spec().output_height, 224u);
  EXPECT_EQ(micro_config().sampler().n, 8u);
  EXPECT_EQ(micro_config().spatial_spec().output_width, 32u);
}

TEST(Config, JsonRoundTrip) {
  auto c = micro_config();
  c.augment.color = false;
  c.study_epochs = {1, 2};
  c.strategy = augment::Strategy::sequential;
  auto back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, UnknownKeysAreRejected) {
  EXPECT_THROW(config_from_json({{"sed", 1}}), ConfigError);
  EXPECT_THROW(config_from_json({{"pretrain", {{"epoch", 3}}}}), ConfigError);
  EXPECT_THROW(config_from_json({{"data", {{"synthetic", {{"colour", 1}}}}}}), ConfigError);
  try {
    config_from_json({{"finetune", {{"lr", 1e-3}, {"lr_decay", 0.5}}}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("finetune.lr_decay"), std::string::npos);
  }
}

TEST(Config, BadValuesAreRejected) {
  EXPECT_THROW(config_from_json({{"tau", "hot"}}), ConfigError);
  EXPECT_THROW(config_from_json({{"preset", "huge"}}), ConfigError);
  EXPECT_THROW(config_from_json({{"pretrain", {{"optimizer", "adam"}}}}), ConfigError);
  auto c = micro_config();
  c.pretrain.batch_size = 1;
  EXPECT_THROW(validate(c), ConfigError);
  c = micro_config();
  c.augment = {false, false, false, false};
  EXPECT_THROW(validate(c), ConfigError);
  c = micro_config();
  c.tau = 0;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Config, FileValuesOverlayDefaults) {
  TempDir tmp;
  std::ofstream(tmp.path() / "c.json") << R"({"seed": 42, "pretrain": {"epochs": 7}})";
  auto c = load_config(tmp.path() / "c.json");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.pretrain.epochs, 7u);
  EXPECT_EQ(c.pretrain.lr, 1e-3);
  std::ofstream(tmp.path() / "bad.json") << "{";
  EXPECT_THROW(load_config(tmp.path() / "bad.json"), ConfigError);
}

TEST(Config, TemporalToggleSelectsUniformSampling) {
  auto c = micro_config();
  EXPECT_EQ(c.sampler().strategy, augment::Strategy::random_choice);
  c.augment.temporal = false;
  EXPECT_EQ(c.sampler().strategy, augment::Strategy::uniform);
  c.augment.flip = false;
  EXPECT_FALSE(c.spatial_spec().flip);
  EXPECT_TRUE(c.spatial_spec().color);
}

TEST(Checkpoint, SaveLoadIsBitExact) {
  TempDir tmp;
  const auto& ck = micro_pretrained();
  save_checkpoint(ck, tmp.path() / "a.ckpt");
  auto back = load_checkpoint(tmp.path() / "a.ckpt");
  EXPECT_EQ(back, ck);
  save_checkpoint(back, tmp.path() / "b.ckpt");
  std::ifstream a(tmp.path() / "a.ckpt", std::ios::binary), b(tmp.path() / "b.ckpt", std::ios::binary);
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(a), {}), std::string(std::istreambuf_iterator<char>(b), {}));
  EXPECT_NE(ck.find("projection.fc1.weight"), nullptr);
  EXPECT_NE(ck.find("stem.bn.running_mean"), nullptr);
  EXPECT_NE(ck.find("projection.fc2.weight#momentum"), nullptr);
}

TEST(Checkpoint, CorruptFilesAreRejected) {
  TempDir tmp;
  save_checkpoint(micro_pretrained(), tmp.path() / "a.ckpt");
  std::filesystem::resize_file(tmp.path() / "a.ckpt", std::filesystem::file_size(tmp.path() / "a.ckpt") - 3);
  EXPECT_THROW(load_checkpoint(tmp.path() / "a.ckpt"), CheckpointError);
  std::ofstream(tmp.path() / "b.ckpt") << "NOTACKPT";
  EXPECT_THROW(load_checkpoint(tmp.path() / "b.ckpt"), CheckpointError);
  EXPECT_THROW(load_checkpoint(tmp.path() / "missing.ckpt"), CheckpointError);
}

TEST(Pretrain, DeterministicUnderSeed) {
  auto c = micro_config();
  c.pretrain.epochs = 1;
  auto data = micro_data(c);
  TrainingLog l1, l2;
  EXPECT_EQ(pretrain(c, data, l1).checkpoint, pretrain(c, data, l2).checkpoint);
}

TEST(Pretrain, WorkerCountDoesNotChangeTheResult) {
  auto c = micro_config();
  c.pretrain.epochs = 1;
  auto data = micro_data(c);
  TrainingLog log;
  auto one = pretrain(c, data, log).checkpoint;
  c.deterministic = false;
  c.workers = 3;
  EXPECT_EQ(pretrain(c, data, log).checkpoint, one);
}

TEST(Pretrain, LabelsAreNeverRead) {
  auto c = micro_config();
  c.pretrain.epochs = 1;
  auto data = micro_data(c);
  TrainingLog log;
  EXPECT_EQ(pretrain(c, relabel(data, 1), log).checkpoint, pretrain(c, data, log).checkpoint);
}

TEST(Pretrain, LogsEveryStepAndEpoch) {
  auto c = micro_config();
  TrainingLog log;
  auto r = pretrain(c, micro_data(c), log);
  EXPECT_EQ(r.epoch_losses.size(), 2u);
  std::size_t steps = 0;
  for (const auto& rec : log.records())
    if (rec.contains("step")) {
      ++steps;
      EXPECT_TRUE(rec.contains("loss") && rec.contains("lr") && rec.contains("timestamp"));
    }
  EXPECT_EQ(steps, 4u);  // 8 clips, batches of 4, two epochs
  EXPECT_EQ(r.checkpoint.epoch, 2u);
}

TEST(Pretrain, RejectsDegenerateBatches) {
  auto c = micro_config();
  auto data = micro_data(c);
  TrainingLog log;
  c.pretrain.batch_size = 1;
  EXPECT_THROW(pretrain(c, data, log), ConfigError);
  c = micro_config();
  EXPECT_THROW(pretrain(c, data.subset({0}), log), ConfigError);
  PretrainOptions opts;
  opts.snapshot_epochs = {3};
  EXPECT_THROW(pretrain(c, data, log, opts), ArgumentError);
}

TEST(Pretrain, WritesCheckpointFiles) {
  TempDir tmp;
  auto c = micro_config();
  c.pretrain.checkpoint_every = 1;
  TrainingLog log;
  PretrainOptions opts;
  opts.checkpoint_dir = tmp.path();
  auto r = pretrain(c, micro_data(c), log, opts);
  EXPECT_TRUE(std::filesystem::exists(tmp.path() / epoch_checkpoint_name(1)));
  EXPECT_EQ(load_checkpoint(tmp.path() / "pretrain.ckpt"), r.checkpoint);
}

TEST(Finetune, OutputLayerIsClassesByEmbedding) {
  auto m = make_classifier(encoder::make_encoder_spec(encoder::Preset::paper), LabelTaxonomy().count(), 0);
  EXPECT_EQ(m.head.weight().shape(), (nn::Shape{6, 512}));
}

TEST(Finetune, LinearProbeLeavesEncoderBitIdentical) {
  auto c = micro_config();
  c.finetune.linear_epochs = 30;
  c.finetune.full_epochs = 0;
  auto data = micro_data(c);
  TrainingLog log;
  auto r = finetune(micro_pretrained(), c, data, data, log);
  const auto& pre = micro_pretrained();
  for (const auto& p : r.model.encoder.parameters()) EXPECT_EQ(p.value(), pre.find(p.name())->value.cast<float>()) << p.name();
  for (const auto& b : r.model.encoder.buffers()) EXPECT_EQ(*b.tensor, pre.find(b.name)->value) << b.name;
  EXPECT_EQ(r.learning_rates.size(), 30u);
}

TEST(Finetune, HeadChangesDuringLinearProbe) {
  auto c = micro_config();
  auto data = micro_data(c);
  TrainingLog log;
  auto fresh = make_classifier(c.encoder_spec(), 2, c.seed);
  c.finetune.full_epochs = 0;
  auto r = finetune(micro_pretrained(), c, data, data, log);
  if (r.best_epoch > 0) EXPECT_NE(r.model.head.weight().value(), fresh.head.weight().value());
  EXPECT_EQ(r.train_losses.size(), 2u);
}

TEST(Finetune, PlateauDecaysEveryThreeEpochsWithFrozenGradients) {
  auto c = micro_config();
  c.finetune.linear_epochs = 10;
  c.finetune.full_epochs = 0;
  auto data = micro_data(c);
  TrainingLog log;
  FinetuneOptions opts;
  opts.frozen_gradients = true;
  auto r = finetune(micro_pretrained(), c, data, data, log, opts);
  const std::vector<double> expected{1e-4, 1e-4, 1e-4, 1e-4, 1e-5, 1e-5, 1e-5, 1e-6, 1e-6, 1e-6};
  ASSERT_EQ(r.learning_rates.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(r.learning_rates[i], expected[i], expected[i] * 1e-9) << i;
}

TEST(Finetune, LogRecordsUnfreezeEpoch) {
  auto c = micro_config();
  c.finetune.linear_epochs = 3;
  c.finetune.full_epochs = 1;
  auto data = micro_data(c);
  TrainingLog log;
  finetune(micro_pretrained(), c, data, data, log);
  bool found = false;
  for (const auto& rec : log.records())
    if (rec.value("event", "") == "unfreeze") {
      found = true;
      EXPECT_EQ(rec["epoch"], 4);
    }
  EXPECT_TRUE(found);
}

TEST(Finetune, DigestMismatchIsCheckpointError) {
  auto c = micro_config();
  auto data = micro_data(c);
  TrainingLog log;
  c.variant = encoder::Variant::mixed;
  EXPECT_THROW(finetune(micro_pretrained(), c, data, data, log), CheckpointError);
}

TEST(Evaluate, ConstantPredictorOnBalancedSplit) {
  std::vector<std::size_t> truth, pred;
  for (std::size_t c = 0; c < 6; ++c)
    for (int i = 0; i < 5; ++i) truth.push_back(c), pred.push_back(0);
  auto m = score_predictions(truth, pred, 6);
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0 / 6.0);
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t k = 1; k < 6; ++k) EXPECT_EQ(m.confusion[r][k], 0u);
  EXPECT_EQ(m.class_counts(), std::vector<std::size_t>(6, 5));
}

TEST(Evaluate, PerfectPredictorGivesIdentityConfusion) {
  std::vector<std::size_t> truth{0, 1, 2, 2, 1, 0, 3};
  auto m = score_predictions(truth, truth, 4);
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t k = 0; k < 4; ++k)
      if (r != k) EXPECT_EQ(m.confusion[r][k], 0u);
}

TEST(Evaluate, ConfusionRowsSumToClassCounts) {
  auto c = micro_config();
  auto data = micro_data(c);
  TrainingLog log;
  auto r = finetune(micro_pretrained(), c, data, data, log);
  auto m = evaluate(r.model, data, c);
  EXPECT_EQ(m.class_counts(), data.class_counts());
  std::size_t trace = 0;
  for (std::size_t k = 0; k < m.confusion.size(); ++k) trace += m.confusion[k][k];
  EXPECT_DOUBLE_EQ(m.accuracy, static_cast<double>(trace) / m.total());
}

TEST(Evaluate, CheckpointRoundTripIsBitExact) {
  TempDir tmp;
  auto c = micro_config();
  auto data = micro_data(c);
  TrainingLog log;
  auto r = finetune(micro_pretrained(), c, data, data, log);
  save_checkpoint(classifier_checkpoint(r.model, 3, c.seed), tmp.path() / "m.ckpt");
  auto loaded = classifier_from_checkpoint(load_checkpoint(tmp.path() / "m.ckpt"));
  const auto inputs = evaluation_inputs(data, c.encoder_spec(), 1);
  nn::NoGrad guard;
  auto a = r.model.forward(Var<float>::constant(inputs), NormMode::eval).value();
  auto b = loaded.forward(Var<float>::constant(inputs), NormMode::eval).value();
  EXPECT_EQ(a, b);
  auto ma = evaluate(r.model, data, c), mb = evaluate(loaded, data, c);
  EXPECT_EQ(ma.confusion, mb.confusion);
  EXPECT_EQ(ma.loss, mb.loss);
}

TEST(Metrics, WritesReportCsvAndHeatmap) {
  TempDir tmp;
  auto m = score_predictions({0, 1, 1}, {0, 1, 0}, 2);
  write_metrics(m, LabelTaxonomy({"a", "b"}), tmp.path());
  EXPECT_TRUE(std::filesystem::exists(tmp.path() / "metrics.json"));
  EXPECT_EQ(read_png(tmp.path() / "confusion.png").width, 48u);
  std::ifstream in(tmp.path() / "confusion.csv");
  std::string header, row0;
  std::getline(in, header);
  std::getline(in, row0);
  EXPECT_EQ(row0, "a,1,0");
}

TEST(Kfold, FoldSplitsPartitionTheSubjects) {
  RunConfig c = micro_config();
  c.data.synthetic.subjects = 6;
  c.folds.k = 3;
  auto data = micro_data(c);
  auto plan = fold_plan(c, data);
  std::multiset<std::string> tested;
  for (std::size_t f = 0; f < 3; ++f) {
    auto s = fold_split(data, plan, f);
    std::set<std::string> tr, va, te;
    for (const auto& d : s.train.clips) tr.insert(d.subject_id);
    for (const auto& d : s.val.clips) va.insert(d.subject_id);
    for (const auto& d : s.test.clips) te.insert(d.subject_id), tested.insert(d.id);
    for (const auto& x : te) EXPECT_FALSE(tr.count(x) || va.count(x));
    for (const auto& x : va) EXPECT_FALSE(tr.count(x));
    EXPECT_EQ(s.train.size() + s.val.size() + s.test.size(), data.size());
  }
  EXPECT_EQ(tested.size(), data.size());
  for (const auto& id : tested) EXPECT_EQ(tested.count(id), 1u);
}

TEST(Kfold, RecordsEveryFoldAndTheirMean) {
  auto c = micro_config();
  auto data = micro_data(c);
  TrainingLog log;
  auto r = run_kfold(c, data, log, &micro_pretrained());
  ASSERT_EQ(r.folds.size(), 2u);
  EXPECT_TRUE(r.shared_pretrain);
  std::multiset<std::string> ids;
  double sum = 0;
  for (const auto& f : r.folds) {
    ids.insert(f.test_clip_ids.begin(), f.test_clip_ids.end());
    sum += f.metrics.accuracy;
  }
  EXPECT_EQ(ids.size(), data.size());
  for (const auto& d : data.clips) EXPECT_EQ(ids.count(d.id), 1u);
  EXPECT_NEAR(r.mean_accuracy(), sum / 2, 1e-12);
  EXPECT_EQ(r.summary.total(), data.size());
}

TEST(Kfold, PerFoldPretrainMode) {
  auto c = micro_config();
  c.pretrain.epochs = 1;
  c.folds.shared_pretrain = false;
  TrainingLog log;
  auto r = run_kfold(c, micro_data(c), log);
  EXPECT_FALSE(r.shared_pretrain);
  EXPECT_EQ(r.folds.size(), 2u);
}

TEST(Ablation, DefaultRowsMirrorTheToggleTable) {
  auto rows = default_ablation_rows();
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].toggles, (AugToggles{true, true, true, true}));
  EXPECT_EQ(rows[1].toggles, (AugToggles{false, true, true, true}));
  EXPECT_EQ(rows[2].toggles, (AugToggles{true, false, true, true}));
  EXPECT_EQ(rows[3].toggles, (AugToggles{true, true, false, true}));
  EXPECT_EQ(rows[4].toggles, (AugToggles{true, true, true, false}));
  TempDir tmp;
  rows[1].accuracy = 0.5;
  write_ablation_csv(rows, tmp.path() / "t.csv");
  std::ifstream in(tmp.path() / "t.csv");
  std::string header, all, no_temp;
  std::getline(in, header);
  std::getline(in, all);
  std::getline(in, no_temp);
  EXPECT_EQ(header, "row,temporal,random_resized_crop,color_distortion,random_flip,accuracy");
  EXPECT_EQ(all, "all,✓,✓,✓,✓,0");
  EXPECT_EQ(no_temp, "no_temporal,✗,✓,✓,✓,0.5");
  EXPECT_THROW(ablation_row("no_blur"), ArgumentError);
}

TEST(Ablation, AllAugmentationsOffIsRejected) {
  auto c = micro_config();
  TrainingLog log;
  EXPECT_THROW(run_ablation(c, micro_data(c), {{"none", {false, false, false, false}, 0, {}}}, log), ConfigError);
}

TEST(Ablation, RunsOneCyclePerRow) {
  auto c = micro_config();
  c.pretrain.epochs = 1;
  TrainingLog log;
  auto rows = run_ablation(c, micro_data(c), {ablation_row("all"), ablation_row("no_flip")}, log);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.fold_accuracies.size(), 2u);
    EXPECT_GE(r.accuracy, 0.0);
    EXPECT_LE(r.accuracy, 1.0);
  }
}

TEST(Studies, EpochStudyUsesMidTrainingSnapshots) {
  auto c = micro_config();
  TrainingLog log;
  auto rows = run_epoch_study(c, micro_data(c), {1, 2}, log);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].key, 1.0);
  EXPECT_EQ(rows[1].key, 2.0);
  EXPECT_THROW(run_epoch_study(c, micro_data(c), {3}, log), ArgumentError);
  EXPECT_THROW(run_epoch_study(c, micro_data(c), {}, log), ArgumentError);
}

TEST(Studies, FullFractionRowEqualsPlainFinetune) {
  auto c = micro_config();
  auto data = micro_data(c);
  TrainingLog log;
  auto rows = run_partial_label_study(c, data, {1.0, 0.5}, log);
  ASSERT_EQ(rows.size(), 2u);
  auto plain = run_kfold(c, data, log, &micro_pretrained());
  EXPECT_EQ(rows[0].fold_accuracies, plain.summary.fold_accuracies);
  TempDir tmp;
  write_study_csv(rows, "labeled_fraction", tmp.path() / "t.csv");
  std::ifstream in(tmp.path() / "t.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "labeled_fraction,accuracy");
}
