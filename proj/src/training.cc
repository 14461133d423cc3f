// awe/training.cc

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

#include "awe/training.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "awe/checkpoint.h"
#include "awe/evaluation.h"
#include "awe/log.h"

namespace awe::training {

namespace fs = std::filesystem;

std::string loss_mode_name(LossMode m) {
  switch (m) {
    case LossMode::kFormOnly: return "form_only";
    case LossMode::kMeaningOnly: return "meaning_only";
    case LossMode::kFormMeaning: return "form_meaning";
    case LossMode::kContrastive: return "contrastive";
  }
  return "?";
}

LossMode parse_loss_mode(const std::string& s) {
  if (s == "form_only") return LossMode::kFormOnly;
  if (s == "meaning_only") return LossMode::kMeaningOnly;
  if (s == "form_meaning") return LossMode::kFormMeaning;
  if (s == "contrastive") return LossMode::kContrastive;
  throw ConfigError("unknown loss mode '" + s + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("train: lr must be positive");
  if (!(lr_factor > 0.0 && lr_factor < 1.0)) throw ConfigError("train: lr_factor must lie in (0, 1)");
  if (lr_patience < 1) throw ConfigError("train: lr_patience must be >= 1");
  if (min_lr < 0.0) throw ConfigError("train: min_lr must be non-negative");
  if (!(clip_norm > 0.0)) throw ConfigError("train: clip_norm must be positive");
  if (margin < 0.0) throw ConfigError("train: margin must be non-negative");
  if (loss_mode == LossMode::kFormMeaning) {
    if (alpha < 0.0 || beta < 0.0) throw ConfigError("train: alpha and beta must be >= 0");
    if (alpha + beta <= 0.0) throw ConfigError("train: alpha + beta must be > 0");
  }
}

double TrainConfig::effective_alpha() const {
  switch (loss_mode) {
    case LossMode::kFormOnly: return 1.0;
    case LossMode::kMeaningOnly: return 0.0;
    case LossMode::kFormMeaning: return alpha;
    case LossMode::kContrastive: return 0.0;
  }
  return 0.0;
}

double TrainConfig::effective_beta() const {
  switch (loss_mode) {
    case LossMode::kFormOnly: return 0.0;
    case LossMode::kMeaningOnly: return 1.0;
    case LossMode::kFormMeaning: return beta;
    case LossMode::kContrastive: return 0.0;
  }
  return 0.0;
}

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"lr", lr},
          {"lr_factor", lr_factor},
          {"lr_patience", lr_patience},
          {"min_lr", min_lr},
          {"clip_norm", clip_norm},
          {"seed", seed},
          {"loss_mode", loss_mode_name(loss_mode)},
          {"margin", margin},
          {"alpha", effective_alpha()},
          {"beta", effective_beta()},
          {"deterministic", deterministic}};
}

std::string epoch_csv_row(const EpochLog& e) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.3f", e.epoch, e.train.phi,
                e.train.lambda, e.train.triplet, e.train.total, e.val_map, e.lr, e.seconds);
  return buf;
}

void write_epoch_csv(const fs::path& path, std::span<const EpochLog> log) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write epoch log: " + path.string());
  out << kEpochCsvHeader << '\n';
  for (const EpochLog& e : log) out << epoch_csv_row(e) << '\n';
}

void adam_step(std::span<nn::ParamTensor* const> params, AdamState& s, double lr) {
  for (const nn::ParamTensor* p : params) {
    if (!p->grad.allFinite()) throw Error("non-finite gradient in " + p->name);
  }
  if (s.m.size() != params.size()) {
    s.m.clear();
    s.v.clear();
    for (const nn::ParamTensor* p : params) {
      s.m.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      s.v.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
    s.step = 0;
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (size_t k = 0; k < params.size(); ++k) {
    nn::ParamTensor& p = *params[k];
    if (s.m[k].rows() != p.value.rows() || s.m[k].cols() != p.value.cols()) {
      throw Error("adam state shape mismatch for " + p.name);
    }
    s.m[k] = s.beta1 * s.m[k] + (1.0 - s.beta1) * p.grad;
    s.v[k] = s.beta2 * s.v[k] + (1.0 - s.beta2) * p.grad.cwiseAbs2();
    p.value.array() -=
        lr * (s.m[k].array() / c1) / ((s.v[k].array() / c2).sqrt() + s.eps);
  }
}

PlateauScheduler::PlateauScheduler(double lr, int patience, double factor, double min_lr)
    : lr_(lr), patience_(patience), factor_(factor), min_lr_(min_lr) {
  if (patience < 1) throw ConfigError("scheduler patience must be >= 1");
  if (!(factor > 0.0 && factor < 1.0)) throw ConfigError("scheduler factor must lie in (0, 1)");
}

double PlateauScheduler::step(double metric) {
  if (fresh_) {
    best_ = decays_ == 0 ? metric : std::max(best_, metric);
    fresh_ = false;
    bad_epochs_ = 0;
    return lr_;
  }
  if (metric > best_) {
    best_ = metric;
    bad_epochs_ = 0;
    return lr_;
  }
  if (++bad_epochs_ >= patience_) {
    bad_epochs_ = 0;
    fresh_ = true;
    if (lr_ * factor_ >= min_lr_) {
      lr_ *= factor_;
      ++decays_;
    }
  }
  return lr_;
}

std::vector<double> plateau_schedule(std::span<const double> history, double lr, int patience,
                                     double factor, double min_lr) {
  PlateauScheduler s(lr, patience, factor, min_lr);
  std::vector<double> out;
  out.reserve(history.size());
  for (double m : history) out.push_back(s.step(m));
  return out;
}

double plateau_scheduler(std::span<const double> history, double lr, int patience, double factor,
                         double min_lr) {
  if (history.empty()) throw Error("plateau_scheduler: empty history");
  return plateau_schedule(history, lr, patience, factor, min_lr).back();
}

LossSpec LossSpec::from(const TrainConfig& cfg) {
  return LossSpec{cfg.loss_mode, cfg.effective_alpha(), cfg.effective_beta(), cfg.margin};
}

Objective compute_objective(nn::Tape& tape, model::AweModel& model, const corpus::Batch& batch,
                            const LossSpec& spec, bool training, nn::RngState& rng) {
  Objective o;
  o.breakdown.segments = batch.size();
  o.embeddings = model.encode(tape, batch.frames, batch.feature_lengths, training, rng);

  if (spec.mode == LossMode::kContrastive) {
    losses::TripletTerms terms = losses::triplet_terms(o.embeddings, batch.word_ids, spec.margin);
    if (!terms.per_anchor.valid()) return o;
    o.total = nn::mean(terms.per_anchor);
    o.breakdown.anchors = terms.anchors.size();
    o.breakdown.triplet = o.total.scalar();
    o.breakdown.total = o.breakdown.triplet;
    return o;
  }

  if (spec.alpha < 0.0 || spec.beta < 0.0 || spec.alpha + spec.beta <= 0.0) {
    throw ConfigError("loss weights give no learning signal");
  }
  if (spec.alpha > 0.0) {
    auto logits = model.decode(tape, o.embeddings, batch.decode_steps());
    o.phi_per_segment = losses::phonological_loss(logits, batch.phone_targets, batch.pad);
    nn::Var phi = nn::mean(o.phi_per_segment);
    o.breakdown.phi = phi.scalar();
    o.total = nn::scale(phi, spec.alpha);
  }
  if (spec.beta > 0.0) {
    nn::Var v = model.regress(tape, o.embeddings);
    o.lambda_per_segment = losses::semantic_loss(v, tape.constant(batch.semantic_targets));
    nn::Var lambda = nn::mean(o.lambda_per_segment);
    o.breakdown.lambda = lambda.scalar();
    nn::Var weighted = nn::scale(lambda, spec.beta);
    o.total = o.total.valid() ? nn::add(o.total, weighted) : weighted;
  }
  o.breakdown.total = losses::joint_loss(o.breakdown.phi, o.breakdown.lambda, spec.alpha, spec.beta);
  return o;
}

void save_checkpoint(const fs::path& path, model::AweModel& model, const CheckpointMeta& meta) {
  nlohmann::json h;
  h["format"] = "awe-checkpoint";
  h["version"] = 1;
  h["model"] = model.config().to_json();
  h["epoch"] = meta.epoch;
  h["val_map"] = meta.val_map;
  h["phone_inventory"] = meta.phone_inventory;
  h["train"] = meta.train_config;
  h["semantic_scaler"] = meta.scaler.is_identity() ? nlohmann::json() : meta.scaler.to_json();
  if (!meta.norm_stats.empty()) {
    const auto& n = meta.norm_stats;
    h["feature_norm"] = {
        {"mean", std::vector<double>(n.mean.data(), n.mean.data() + n.mean.size())},
        {"stddev", std::vector<double>(n.stddev.data(), n.stddev.data() + n.stddev.size())}};
  }
  auto params = model.parameters();
  std::vector<const nn::ParamTensor*> tensors(params.begin(), params.end());
  nn::save_archive(path, h, tensors);
}

LoadedCheckpoint load_checkpoint(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("checkpoint not found: " + path.string());
  nn::Archive a = nn::load_archive(path);
  const auto& h = a.header;
  if (h.value("format", "") != "awe-checkpoint") throw Error("not a model checkpoint: " + path.string());
  LoadedCheckpoint out;
  model::ModelConfig cfg = model::ModelConfig::from_json(h.at("model"));
  out.model = std::make_unique<model::AweModel>(cfg, 0);
  auto params = out.model->parameters();
  nn::restore_parameters(a, params);
  out.meta.epoch = h.at("epoch").get<int>();
  out.meta.val_map = h.at("val_map").get<double>();
  out.meta.phone_inventory = h.at("phone_inventory").get<std::vector<std::string>>();
  out.meta.train_config = h.value("train", nlohmann::json::object());
  if (h.contains("semantic_scaler") && !h["semantic_scaler"].is_null()) {
    out.meta.scaler = corpus::SemanticScaler::from_json(h["semantic_scaler"]);
  }
  if (h.contains("feature_norm")) {
    auto mean = h["feature_norm"].at("mean").get<std::vector<double>>();
    auto sd = h["feature_norm"].at("stddev").get<std::vector<double>>();
    out.meta.norm_stats.mean = Eigen::Map<RowVector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    out.meta.norm_stats.stddev = Eigen::Map<RowVector>(sd.data(), static_cast<Eigen::Index>(sd.size()));
  }
  return out;
}

corpus::CorpusOptions corpus_options_for(const CheckpointMeta& meta) {
  corpus::CorpusOptions o;
  o.normalize_features = !meta.norm_stats.empty();
  if (!meta.norm_stats.empty()) o.norm_stats = meta.norm_stats;
  o.scale_semantic_targets = !meta.scaler.is_identity();
  if (!meta.scaler.is_identity()) o.scaler = meta.scaler;
  return o;
}

model::ModelConfig tiny_model_config() {
  model::ModelConfig c;
  c.conv_filters = 8;
  c.gru_layers = 3;
  c.hidden = 8;
  c.dropout = 0.0;
  c.semantic_dim = 8;
  c.phone_inventory_size = 5;
  return c;
}

corpus::Batch tiny_batch(uint64_t seed) {
  const model::ModelConfig cfg = tiny_model_config();
  nn::RngState rng(seed);
  const std::vector<int> lengths = {14, 11, 17, 12};
  const std::vector<int> taus = {3, 2, 4, 2};
  const int t_max = 17;
  const int pad = cfg.phone_inventory_size + 1;

  corpus::Batch b;
  b.eos = cfg.eos();
  b.pad = pad;
  b.feature_lengths = lengths;
  b.word_ids = {0, 0, 1, 1};
  b.speaker_ids = {0, 1, 0, 1};
  b.record_indices = {0, 1, 2, 3};
  b.phone_lengths.clear();
  for (int tau : taus) b.phone_lengths.push_back(tau + 1);
  for (int t = 0; t < t_max; ++t) {
    Matrix f = Matrix::Zero(4, cfg.feature_dim);
    for (int i = 0; i < 4; ++i) {
      if (t >= lengths[i]) continue;
      for (int d = 0; d < cfg.feature_dim; ++d) f(i, d) = rng.normal(0.0, 1.0);
    }
    b.frames.push_back(f);
  }
  b.phone_targets = Eigen::MatrixXi::Constant(4, 5, pad);
  for (int i = 0; i < 4; ++i) {
    for (int t = 0; t < taus[i]; ++t) {
      b.phone_targets(i, t) = static_cast<int>(rng.uniform(0.0, 1.0) * cfg.phone_inventory_size) %
                              cfg.phone_inventory_size;
    }
    b.phone_targets(i, taus[i]) = b.eos;
  }
  b.semantic_targets.resize(4, cfg.semantic_dim);
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < cfg.semantic_dim; ++k) b.semantic_targets(i, k) = rng.uniform(-0.9, 0.9);
  }
  return b;
}

nn::GradCheckReport check_gradients(LossMode mode, double eps, int samples, uint64_t seed) {
  model::AweModel model(tiny_model_config(), seed);
  const corpus::Batch batch = tiny_batch(seed + 1);
  TrainConfig tc;
  tc.loss_mode = mode;
  const LossSpec spec = LossSpec::from(tc);
  nn::RngState rng(seed + 2);
  auto params = model.parameters();
  return nn::finite_difference_check(
      params,
      [&](nn::Tape& tape) {
        Objective o = compute_objective(tape, model, batch, spec, false, rng);
        if (!o.total.valid()) throw Error("gradient check batch yields no loss");
        return o.total;
      },
      eps, samples, seed + 3);
}

namespace {

std::vector<Matrix> snapshot(std::span<nn::ParamTensor* const> params) {
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (const nn::ParamTensor* p : params) out.push_back(p->value);
  return out;
}

uint64_t derive_seed(uint64_t seed, uint64_t stream) {
  std::seed_seq seq{seed, stream};
  uint64_t out[1];
  std::array<uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  out[0] = (static_cast<uint64_t>(words[0]) << 32) | words[1];
  return out[0];
}

}  // namespace

TrainResult train(const corpus::Corpus& corpus, const model::ModelConfig& model_cfg,
                  const TrainConfig& cfg, const fs::path& run_dir) {
  cfg.validate();
  model::ModelConfig mcfg = model_cfg;
  mcfg.phone_inventory_size = corpus.lexicon().phone_count();
  mcfg.semantic_dim = corpus.semantics().dim();
  mcfg.validate();

  const auto train_idx = corpus.split_indices(corpus::Split::kTrain);
  const auto valid_idx = corpus.split_indices(corpus::Split::kValid);
  if (train_idx.empty()) throw Error("training split is empty");
  if (valid_idx.empty()) throw Error("validation split is empty");
  const bool pairs = cfg.loss_mode == LossMode::kContrastive;

  model::AweModel model(mcfg, derive_seed(cfg.seed, 1));
  nn::RngState dropout_rng(derive_seed(cfg.seed, 2));
  auto params = model.parameters();
  AdamState adam;
  PlateauScheduler scheduler(cfg.lr, cfg.lr_patience, cfg.lr_factor, cfg.min_lr);
  const LossSpec spec = LossSpec::from(cfg);

  CheckpointMeta meta;
  meta.norm_stats = corpus.norm_stats();
  meta.scaler = corpus.scaler();
  meta.phone_inventory = corpus.lexicon().inventory();
  meta.train_config = cfg.to_json();

  if (!run_dir.empty()) {
    fs::create_directories(run_dir / "checkpoints");
  }

  TrainResult result;
  std::vector<Matrix> best_params;
  double lr = cfg.lr;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    auto plan = corpus::make_batches(corpus, corpus::Split::kTrain, cfg.batch_size,
                                     derive_seed(cfg.seed, 1000 + static_cast<uint64_t>(epoch)),
                                     pairs);
    EpochLog entry;
    entry.epoch = epoch;
    entry.lr = lr;
    double seg_total = 0.0;
    for (size_t b = 0; b < plan.size(); ++b) {
      corpus::Batch batch = corpus::assemble_batch(corpus, plan[b]);
      nn::zero_grads(params);
      nn::Tape tape;
      Objective obj = compute_objective(tape, model, batch, spec, true, dropout_rng);
      if (!obj.total.valid()) continue;
      if (!std::isfinite(obj.total.scalar())) {
        std::ostringstream os;
        os << "non-finite loss at epoch " << epoch << ", batch " << b << " (phi=" << obj.breakdown.phi
           << ", lambda=" << obj.breakdown.lambda << ", triplet=" << obj.breakdown.triplet << ")";
        throw Error(os.str());
      }
      tape.backward(obj.total);
      nn::clip_grad_norm(params, cfg.clip_norm);
      adam_step(params, adam, lr);

      const double w = static_cast<double>(batch.size());
      entry.train.phi += w * obj.breakdown.phi;
      entry.train.lambda += w * obj.breakdown.lambda;
      entry.train.triplet += w * obj.breakdown.triplet;
      entry.train.total += w * obj.breakdown.total;
      entry.train.segments += batch.size();
      entry.train.anchors += obj.breakdown.anchors;
      seg_total += w;
    }
    if (seg_total > 0.0) {
      entry.train.phi /= seg_total;
      entry.train.lambda /= seg_total;
      entry.train.triplet /= seg_total;
      entry.train.total /= seg_total;
    }

    eval::EmbeddingSet valid = eval::embed_split(model, corpus, corpus::Split::kValid,
                                                 cfg.eval_batch_size);
    entry.val_map = eval::same_different_map(valid).map;
    lr = scheduler.step(entry.val_map);

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    entry.seconds = cfg.deterministic ? 0.0 : secs;
    result.log.push_back(entry);

    meta.epoch = epoch;
    meta.val_map = entry.val_map;
    const bool improved = result.best_epoch == 0 || entry.val_map > result.best_val_map;
    if (improved) {
      result.best_epoch = epoch;
      result.best_val_map = entry.val_map;
      best_params = snapshot(params);
    }
    if (!run_dir.empty()) {
      if (cfg.save_every_epoch) {
        save_checkpoint(run_dir / "checkpoints" / ("epoch_" + std::to_string(epoch)), model, meta);
      }
      if (improved) save_checkpoint(run_dir / "checkpoints" / "best", model, meta);
      write_epoch_csv(run_dir / "epochs.csv", result.log);
    }
    char line[256];
    std::snprintf(line, sizeof(line), "epoch %d  loss %.4f  val mAP %.4f  lr %.2e  %.1fs", epoch,
                  entry.train.total, entry.val_map, entry.lr, secs);
    log_info(line);
  }

  result.best_model = std::make_unique<model::AweModel>(mcfg, 0);
  auto best = result.best_model->parameters();
  for (size_t k = 0; k < best.size(); ++k) best[k]->value = best_params[k];

  if (!corpus.split_indices(corpus::Split::kTest).empty()) {
    eval::EmbeddingSet test =
        eval::embed_split(*result.best_model, corpus, corpus::Split::kTest, cfg.eval_batch_size);
    result.test_map = eval::same_different_map(test).map;
  }
  if (!run_dir.empty()) {
    nlohmann::json r = {{"best_epoch", result.best_epoch},
                        {"best_val_map", result.best_val_map},
                        {"loss_mode", loss_mode_name(cfg.loss_mode)}};
    if (result.test_map) r["test_map"] = *result.test_map;
    std::ofstream(run_dir / "result.json") << r.dump(2) << '\n';
  }
  return result;
}

}  // namespace awe::training
