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

// Command-line front end. Progress goes to `err`; tables that exist to be
// diffed (arch-dump, gradcheck) go to `out`; everything else lands in files
// under --out.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stclr/gradcheck_suite.hpp"
#include "stclr/stclr.hpp"

namespace stclr::cli {

namespace fs = std::filesystem;
using trainer::RunConfig;

// Flags shared by every subcommand. Unset optionals leave the file/default
// value alone.
struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> preset;
  std::optional<std::string> variant;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<double> tau;
  std::optional<std::string> out;
  std::optional<std::size_t> workers;
  std::optional<std::string> data;
  std::optional<std::size_t> folds;
  bool deterministic = false;
};

inline void apply_flags(RunConfig& c, const CommonFlags& f) {
  if (f.seed) c.seed = *f.seed;
  if (f.preset) c.preset = encoder::parse_preset(*f.preset);
  if (f.variant) c.variant = encoder::parse_variant(*f.variant);
  if (f.epochs) c.pretrain.epochs = *f.epochs;
  if (f.batch_size) c.pretrain.batch_size = *f.batch_size;
  if (f.tau) c.tau = *f.tau;
  if (f.out) c.out = *f.out;
  if (f.workers) c.workers = *f.workers;
  if (f.data) c.data.root = *f.data;
  if (f.folds) c.folds.k = *f.folds;
  if (f.deterministic) c.deterministic = true;
}

inline RunConfig base_config(const CommonFlags& f) {
  return f.config.empty() ? RunConfig{} : trainer::load_config(f.config);
}

// default < --config file < flags
inline RunConfig resolve_config(const CommonFlags& f) {
  RunConfig c = base_config(f);
  apply_flags(c, f);
  trainer::validate(c);
  return c;
}

// Frames are decoded up front; training reads them from memory.
inline DatasetIndex load_data(const RunConfig& c) {
  if (c.data.root.empty()) return generate_synthetic(c.data.synthetic);
  auto index = c.data.classes.empty() ? load_dataset(c.data.root)
                                      : load_dataset(c.data.root, LabelTaxonomy(c.data.classes));
  return trainer::materialize(std::move(index), c.worker_count());
}

// Creates the run directory and echoes the resolved config into it.
inline fs::path prepare_out(const RunConfig& c) {
  const fs::path dir(c.out);
  fs::create_directories(dir);
  trainer::write_config(c, dir / "config.json");
  return dir;
}

inline std::string fold_dir_name(std::size_t f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fold_%02zu", f);
  return buf;
}

// Held-out metrics per fold plus the summed summary at the top level.
inline void write_kfold(const trainer::KfoldResult& r, const LabelTaxonomy& tax, const fs::path& dir) {
  trainer::write_metrics(r.summary, tax, dir);
  std::ofstream csv(dir / "folds.csv");
  csv << "fold,accuracy,test_clips\n";
  for (const auto& f : r.folds) {
    trainer::write_metrics(f.metrics, tax, dir / fold_dir_name(f.fold));
    csv << f.fold << ',' << f.metrics.accuracy << ',' << f.test_clip_ids.size() << '\n';
  }
}

template <typename T>
std::vector<T> parse_list(const std::string& s, const std::string& what) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !(is >> std::ws).eof()) throw ArgumentError("bad " + what + " entry: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ArgumentError(what + ": empty list");
  return out;
}

inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"stclr: self-supervised spatiotemporal contrastive learning on video clips", "stclr"};
  app.fallthrough();
  app.require_subcommand(1);

  CommonFlags f;
  app.add_option("--config", f.config, "JSON run config (flags override its keys)");
  app.add_option("--seed", f.seed, "root seed");
  app.add_option("--preset", f.preset, "encoder size")->check(CLI::IsMember({"paper", "tiny"}));
  app.add_option("--variant", f.variant, "block convolution type")
      ->check(CLI::IsMember({"r2plus1d", "full3d", "mixed"}));
  app.add_option("--epochs", f.epochs, "pretraining epochs")->check(CLI::PositiveNumber);
  app.add_option("--batch-size", f.batch_size, "pretraining batch size (clips)")->check(CLI::PositiveNumber);
  app.add_option("--tau", f.tau, "NT-Xent temperature")->check(CLI::PositiveNumber);
  app.add_option("--out", f.out, "run directory");
  app.add_option("--workers", f.workers, "data worker threads (default: STCLR_NUM_WORKERS or 1)");
  app.add_option("--data", f.data, "dataset root (default: in-memory synthetic set)");
  app.add_option("--folds", f.folds, "k for the subject-grouped folds")->check(CLI::Range(2, 1000));
  app.add_flag("--deterministic", f.deterministic, "single worker, fixed order");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "write a synthetic dataset and its parameter log");
  std::optional<std::size_t> g_classes, g_subjects, g_videos, g_frames, g_height, g_width;
  gen->add_option("--classes", g_classes)->check(CLI::PositiveNumber);
  gen->add_option("--subjects", g_subjects)->check(CLI::PositiveNumber);
  gen->add_option("--videos", g_videos, "videos per subject per class")->check(CLI::PositiveNumber);
  gen->add_option("--frames", g_frames)->check(CLI::PositiveNumber);
  gen->add_option("--height", g_height)->check(CLI::PositiveNumber);
  gen->add_option("--width", g_width)->check(CLI::PositiveNumber);

  auto* pre = app.add_subcommand("pretrain", "contrastive pretraining; writes pretrain.ckpt");

  auto* fin = app.add_subcommand("finetune", "linear probe then full fine-tune on one fold");
  std::string fin_ckpt;
  std::size_t fin_fold = 0;
  fin->add_option("--checkpoint", fin_ckpt, "pretrain checkpoint")->required();
  fin->add_option("--fold", fin_fold, "test fold; the rest trains and validates");

  auto* ev = app.add_subcommand("eval", "score a fine-tuned checkpoint");
  std::string ev_ckpt;
  std::optional<std::size_t> ev_fold;
  ev->add_option("--checkpoint", ev_ckpt, "finetune checkpoint")->required();
  ev->add_option("--fold", ev_fold, "score only this test fold (default: every clip)");

  auto* kf = app.add_subcommand("kfold", "subject-grouped k-fold protocol");

  auto* ab = app.add_subcommand("ablate", "augmentation ablation table");
  std::string ab_rows = "all,no_temporal,no_crop,no_color,no_flip";
  ab->add_option("--rows", ab_rows, "comma list of rows")->capture_default_str();

  auto* es = app.add_subcommand("epoch-study", "accuracy vs pretraining epochs");
  std::string es_epochs;
  es->add_option("--study-epochs", es_epochs, "comma list (default: config epoch_study.epochs)");

  auto* pl = app.add_subcommand("partial-labels", "accuracy vs labelled fraction");
  std::string pl_fractions;
  pl->add_option("--fractions", pl_fractions, "comma list (default: config partial_labels.fractions)");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient suite (double)");
  std::size_t gc_draws = 5, gc_entries = 3;
  gc->add_option("--draws", gc_draws, "random shapes per primitive")->capture_default_str();
  gc->add_option("--entries", gc_entries, "entries sampled per composite leaf")->capture_default_str();

  auto* ad = app.add_subcommand("arch-dump", "print the encoder layer table");
  bool ad_csv = false;
  ad->add_flag("--csv", ad_csv, "comma-separated output");

  if (args.empty()) {
    err << app.help();
    return 2;
  }
  std::vector<std::string> argv_store{"stclr"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    // --help after a subcommand prints that subcommand's help.
    const CLI::App* target = &app;
    for (const auto* s : app.get_subcommands()) target = s;
    out << target->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "stclr: " << e.what() << "\n" << "run 'stclr --help' for usage\n";
    return 2;
  }

  try {
    if (*ad) {
      RunConfig c = base_config(f);
      if (f.preset) c.preset = encoder::parse_preset(*f.preset);
      if (f.variant) c.variant = encoder::parse_variant(*f.variant);
      out << encoder::render_table(encoder::architecture_table(c.encoder_spec()), ad_csv);
      return 0;
    }

    if (*gc) {
      GradCheckSuiteOptions o;
      o.seed = f.seed.value_or(0);
      o.shape_draws = gc_draws;
      o.composite_entries = gc_entries;
      const auto results = run_gradcheck_suite(o);
      bool ok = true;
      out << std::left << std::setw(30) << "check" << std::setw(14) << "max_rel_err" << "entries\n";
      for (const auto& r : results) {
        const bool pass = r.max_relative_error < 1e-3;
        ok = ok && pass;
        out << std::left << std::setw(30) << r.name << std::setw(14) << std::setprecision(3)
            << std::scientific << r.max_relative_error << std::defaultfloat << r.entries_checked
            << (pass ? "" : "  FAIL") << '\n';
      }
      return ok ? 0 : 1;
    }

    if (*gen) {
      RunConfig base = base_config(f);
      auto& s = base.data.synthetic;
      if (g_classes) s.classes = *g_classes;
      if (g_subjects) s.subjects = *g_subjects;
      if (g_videos) s.videos_per_subject_per_class = *g_videos;
      if (g_frames) s.frames = *g_frames;
      if (g_height) s.height = *g_height;
      if (g_width) s.width = *g_width;
      // --seed drives the generator too, so one flag reproduces the dataset.
      if (f.seed) s.seed = *f.seed;
      require<ArgumentError>(!f.data, "gen-data writes its dataset under --out; --data does not apply");
      apply_flags(base, f);
      const fs::path dir(base.out);
      const fs::path root = fs::absolute(dir / "data");
      base.data.root = root.string();
      base.data.classes = synthetic_class_names(s.classes);
      trainer::validate(base);
      std::vector<SyntheticClipParams> params;
      const auto index = generate_synthetic(s, &params);
      fs::create_directories(dir);
      write_dataset(index, root);
      write_gen_params(dir / "gen_params.csv", params);
      trainer::write_config(base, dir / "config.json");
      err << "wrote " << index.size() << " clips to " << root.string() << '\n';
      return 0;
    }

    const RunConfig c = resolve_config(f);
    const fs::path dir = prepare_out(c);
    trainer::TrainingLog log(dir / "train_log.jsonl");
    log.set_progress(&err);
    const DatasetIndex data = load_data(c);
    err << "dataset: " << data.size() << " clips, " << data.taxonomy.count() << " classes\n";

    if (*pre) {
      trainer::PretrainOptions o;
      o.checkpoint_dir = dir;
      trainer::pretrain(c, data, log, o);
      err << "wrote " << (dir / "pretrain.ckpt").string() << '\n';
    } else if (*fin) {
      const auto ck = trainer::load_checkpoint(fin_ckpt);
      const auto plan = trainer::fold_plan(c, data);
      require<ArgumentError>(fin_fold < plan.k, "--fold must be below folds.k");
      const auto split = trainer::fold_split(data, plan, fin_fold);
      auto tuned = trainer::finetune(ck, c, split.train, split.val, log);
      trainer::save_checkpoint(trainer::classifier_checkpoint(tuned.model, tuned.best_epoch, c.seed),
                               dir / "finetune.ckpt");
      auto m = trainer::evaluate(tuned.model, split.test, c);
      m.epoch_losses = tuned.train_losses;
      trainer::write_metrics(m, data.taxonomy, dir);
      err << "fold " << fin_fold << " test accuracy " << m.accuracy << '\n';
    } else if (*ev) {
      auto model = trainer::classifier_from_checkpoint(trainer::load_checkpoint(ev_ckpt));
      DatasetIndex test = data;
      if (ev_fold) {
        const auto plan = trainer::fold_plan(c, data);
        require<ArgumentError>(*ev_fold < plan.k, "--fold must be below folds.k");
        test = data.subset(plan.test_positions(data, *ev_fold));
      }
      const auto m = trainer::evaluate(model, test, c);
      trainer::write_metrics(m, data.taxonomy, dir);
      err << "accuracy " << m.accuracy << " on " << test.size() << " clips\n";
    } else if (*kf) {
      const auto r = trainer::run_kfold(c, data, log);
      write_kfold(r, data.taxonomy, dir);
      err << "mean accuracy " << r.mean_accuracy() << '\n';
    } else if (*ab) {
      std::vector<trainer::AblationRow> rows;
      for (const auto& name : parse_list<std::string>(ab_rows, "--rows")) rows.push_back(trainer::ablation_row(name));
      const auto done = trainer::run_ablation(c, data, rows, log);
      trainer::write_ablation_csv(done, dir / "ablation.csv");
    } else if (*es) {
      const auto epochs = es_epochs.empty() ? c.study_epochs : parse_list<std::size_t>(es_epochs, "--study-epochs");
      const auto rows = trainer::run_epoch_study(c, data, epochs, log);
      trainer::write_study_csv(rows, "ssl_epochs", dir / "epoch_study.csv");
    } else if (*pl) {
      const auto fr = pl_fractions.empty() ? c.label_fractions : parse_list<double>(pl_fractions, "--fractions");
      const auto rows = trainer::run_partial_label_study(c, data, fr, log);
      trainer::write_study_csv(rows, "label_fraction", dir / "partial_labels.csv");
    }
    return 0;
  } catch (const std::exception& e) {
    err << "stclr: error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace stclr::cli
