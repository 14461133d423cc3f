// awe/cli.cc

// Copyright 2026 The AWE Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.


#include "awe/cli.h"

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "awe/log.h"

namespace awe::cli {

namespace fs = std::filesystem;

RunConfig resolve_config(const CommonOptions& opts) {
  RunConfig cfg;
  if (!opts.config.empty()) cfg = load_run_config(opts.config);
  for (const std::string& o : opts.overrides) cfg.set(o);
  if (opts.seed) cfg.set_seed(*opts.seed);
  if (opts.deterministic) cfg.train.deterministic = true;
  cfg.validate();
  return cfg;
}

void cmd_synth(const RunConfig& cfg, const fs::path& out_dir, bool force, std::ostream& out) {
  cfg.synth.validate();
  if (fs::exists(out_dir) && !fs::is_empty(out_dir)) {
    if (!force) throw ConfigError("output directory is not empty (use --force): " + out_dir.string());
    fs::remove_all(out_dir);
  }
  synth::SynthCorpus sc = synth::generate_corpus(cfg.synth);
  synth::write_corpus(sc, out_dir);
  std::ofstream(out_dir / "config.toml") << cfg.to_toml();

  corpus::CorpusOptions opts;
  opts.normalize_features = false;
  opts.scale_semantic_targets = false;
  const corpus::Corpus c = corpus::load_corpus_dir(out_dir, opts);
  char line[160];
  std::snprintf(line, sizeof(line), "%-6s %9s %6s %9s %18s %7s\n", "split", "segments", "types",
                "speakers", "duration (s)", "TTR");
  out << line;
  for (corpus::Split s : {corpus::Split::kTrain, corpus::Split::kValid, corpus::Split::kTest}) {
    const corpus::SplitStats st = corpus::split_stats(c, s);
    std::snprintf(line, sizeof(line), "%-6s %9zu %6zu %9zu %10.3f ± %5.3f %7.4f\n",
                  corpus::split_name(s).c_str(), st.segments, st.types, st.speakers,
                  st.duration_mean, st.duration_sd, st.ttr);
    out << line;
  }
  out << "speaker-disjoint: " << (corpus::speakers_disjoint(c) ? "yes" : "no") << '\n';
}

training::TrainResult cmd_train(const RunConfig& cfg, const fs::path& corpus_dir,
                                const fs::path& run_dir, std::ostream& out) {
  cfg.validate();
  if (run_dir.empty()) throw ConfigError("train needs --run-dir");
  fs::create_directories(run_dir);
  std::ofstream(run_dir / "config.toml") << cfg.to_toml();
  const corpus::Corpus c = corpus::load_corpus_dir(corpus_dir, cfg.corpus_options());
  training::TrainResult r = training::train(c, cfg.model, cfg.train, run_dir);
  char line[160];
  std::snprintf(line, sizeof(line), "best epoch %d  val mAP %.4f", r.best_epoch, r.best_val_map);
  out << line;
  if (r.test_map) {
    std::snprintf(line, sizeof(line), "  test mAP %.4f", *r.test_map);
    out << line;
  }
  out << '\n';
  return r;
}

eval::MapResult cmd_eval(const fs::path& checkpoint, const fs::path& corpus_dir,
                         const std::string& split, const std::optional<RunConfig>& cfg,
                         const fs::path& export_path, std::ostream& out) {
  const corpus::Split which = corpus::parse_split(split);
  training::LoadedCheckpoint ck = training::load_checkpoint(checkpoint);
  const model::ModelConfig& mc = ck.model->config();
  if (cfg) {
    const model::ModelConfig& want = cfg->model;
    if (want.conv_filters != mc.conv_filters || want.kernel != mc.kernel ||
        want.stride != mc.stride || want.gru_layers != mc.gru_layers || want.hidden != mc.hidden) {
      throw ConfigError("architecture mismatch between checkpoint and config");
    }
  }
  const corpus::Corpus c = corpus::load_corpus_dir(corpus_dir, training::corpus_options_for(ck.meta));
  if (c.lexicon().inventory() != ck.meta.phone_inventory) {
    throw Error("checkpoint phone inventory does not match the corpus lexicon");
  }
  if (c.semantics().dim() != mc.semantic_dim) {
    throw Error("checkpoint semantic dimension does not match the corpus");
  }
  const size_t batch = cfg ? cfg->eval.batch_size : 128;
  eval::EmbeddingSet set = eval::embed_split(*ck.model, c, which, batch);
  eval::MapResult r = eval::same_different_map(set);
  r.split = split;
  if (!export_path.empty()) eval::export_embeddings(set, export_path);
  out << r.to_json().dump() << '\n';
  return r;
}

bool cmd_check_grad(double eps, uint64_t seed, std::ostream& out) {
  if (!(eps > 0.0)) throw ConfigError("--eps must be positive");
  bool ok = true;
  for (training::LossMode m :
       {training::LossMode::kFormOnly, training::LossMode::kMeaningOnly,
        training::LossMode::kFormMeaning, training::LossMode::kContrastive}) {
    const nn::GradCheckReport r = training::check_gradients(m, eps, 64, seed);
    const bool pass = r.passed();
    ok = ok && pass;
    char line[200];
    std::snprintf(line, sizeof(line), "%-13s %s  max rel %.3e  max abs (small) %.3e  n=%zu  worst %s\n",
                  training::loss_mode_name(m).c_str(), pass ? "PASS" : "FAIL", r.max_rel_error,
                  r.max_abs_error_small, r.sampled, r.worst_param.c_str());
    out << line;
  }
  return ok;
}

namespace {

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config, "TOML-style config file");
  app->add_option("--seed", o.seed, "seed for generation and training");
  app->add_flag("--deterministic", o.deterministic, "bitwise reproducible logs");
  app->add_option("--set", o.overrides, "override, e.g. train.lr=5e-4");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Acoustic word embeddings: synthesis, training and evaluation"};
  app.require_subcommand(1);

  CommonOptions common;
  fs::path out_dir, corpus_dir, checkpoint, export_path;
  bool force = false;
  std::string split;
  double eps = 1e-4;

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  add_common(synth, common);
  synth->add_option("--out", out_dir, "output directory")->required();
  synth->add_flag("--force", force, "replace a non-empty output directory");

  CLI::App* train = app.add_subcommand("train", "train a model");
  add_common(train, common);
  train->add_option("--corpus", corpus_dir, "corpus directory")->required();
  train->add_option("--run-dir", common.run_dir, "run directory")->required();

  CLI::App* ev = app.add_subcommand("eval", "same-different evaluation of a checkpoint");
  add_common(ev, common);
  ev->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  ev->add_option("--corpus", corpus_dir, "corpus directory")->required();
  ev->add_option("--split", split, "train, valid or test");
  ev->add_option("--export", export_path, "write embeddings as TSV");
  ev->add_option("--run-dir", common.run_dir, "unused; accepted for symmetry");

  CLI::App* grad = app.add_subcommand("check-grad", "finite-difference gradient check");
  add_common(grad, common);
  grad->add_option("--eps", eps, "central difference step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      cmd_synth(resolve_config(common), out_dir, force, out);
    } else if (train->parsed()) {
      cmd_train(resolve_config(common), corpus_dir, common.run_dir, out);
    } else if (ev->parsed()) {
      std::optional<RunConfig> cfg;
      if (!common.config.empty() || !common.overrides.empty()) cfg = resolve_config(common);
      if (split.empty()) split = cfg ? cfg->eval.split : "test";
      cmd_eval(checkpoint, corpus_dir, split, cfg, export_path, out);
    } else if (grad->parsed()) {
      resolve_config(common);
      if (!cmd_check_grad(eps, common.seed.value_or(7), out)) return 1;
    }
  } catch (const ConfigError& e) {
    err << "ERROR (awe) " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "ERROR (awe) " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace awe::cli
