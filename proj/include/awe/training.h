// awe/training.h

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

#ifndef AWE_TRAINING_H_
#define AWE_TRAINING_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "awe/corpus.h"
#include "awe/losses.h"
#include "awe/model.h"
#include "json.hpp"

namespace awe::training {

enum class LossMode { kFormOnly, kMeaningOnly, kFormMeaning, kContrastive };

std::string loss_mode_name(LossMode m);
/// form_only, meaning_only, form_meaning, contrastive. Throws ConfigError.
LossMode parse_loss_mode(const std::string& s);

struct TrainConfig {
  int epochs = 100;
  size_t batch_size = 256;
  double lr = 1e-3;
  double lr_factor = 0.5;
  int lr_patience = 10;
  double min_lr = 1e-6;
  double clip_norm = 5.0;
  uint64_t seed = 1;
  LossMode loss_mode = LossMode::kFormMeaning;
  double margin = losses::kDefaultMargin;
  /// Weights used in form_meaning mode; the other modes fix them.
  double alpha = 1.0;
  double beta = 1.0;
  /// Writes 0 to the wall-time column so repeated runs give identical logs.
  bool deterministic = false;
  bool save_every_epoch = true;
  size_t eval_batch_size = 128;

  void validate() const;
  double effective_alpha() const;
  double effective_beta() const;
  nlohmann::json to_json() const;
};

struct EpochLog {
  int epoch = 0;
  losses::LossBreakdown train;
  double val_map = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
};

inline constexpr const char* kEpochCsvHeader = "epoch,phi,lambda,triplet,total,val_map,lr,seconds";
std::string epoch_csv_row(const EpochLog& e);
void write_epoch_csv(const std::filesystem::path& path, std::span<const EpochLog> log);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
};

/// Bias-corrected Adam. Throws Error on non-finite gradients before touching
/// any parameter.
void adam_step(std::span<nn::ParamTensor* const> params, AdamState& state, double lr);

/// Reduce-on-plateau for a maximised metric. The first epoch of every window
/// (the start of training and the epoch after each decay) only sets the
/// reference; after that, `patience` consecutive epochs without a strict
/// improvement multiply the LR by `factor`. A decay that would go below
/// min_lr is skipped, so the LR is always lr0·factor^k.
class PlateauScheduler {
 public:
  PlateauScheduler(double lr, int patience, double factor, double min_lr = 0.0);

  /// Feeds one epoch's metric; returns the LR for the next epoch.
  double step(double metric);
  double lr() const { return lr_; }
  int decays() const { return decays_; }

 private:
  double lr_;
  int patience_;
  double factor_;
  double min_lr_;
  double best_ = 0.0;
  bool fresh_ = true;
  int bad_epochs_ = 0;
  int decays_ = 0;
};

/// LR in effect after each epoch of a metric history.
std::vector<double> plateau_schedule(std::span<const double> history, double lr, int patience,
                                     double factor, double min_lr = 0.0);
/// LR after the whole history (the LR for the next epoch).
double plateau_scheduler(std::span<const double> history, double lr, int patience = 10,
                         double factor = 0.5, double min_lr = 0.0);

struct LossSpec {
  LossMode mode = LossMode::kFormMeaning;
  double alpha = 1.0;
  double beta = 1.0;
  double margin = losses::kDefaultMargin;

  static LossSpec from(const TrainConfig& cfg);
};

struct Objective {
  nn::Var total;          // invalid when the batch yields no usable term
  nn::Var embeddings;     // B × D
  nn::Var phi_per_segment;     // B × 1, invalid if the decoder branch is skipped
  nn::Var lambda_per_segment;  // B × 1, invalid if the regressor branch is skipped
  losses::LossBreakdown breakdown;
};

/// Builds the loss of one batch. Branches whose weight is zero are not built,
/// so their parameters receive exactly zero gradient.
Objective compute_objective(nn::Tape& tape, model::AweModel& model, const corpus::Batch& batch,
                            const LossSpec& spec, bool training, nn::RngState& rng);

/// hidden 8 (so D 8), K 8, 5 phones + EOS, 8 conv filters, no dropout.
model::ModelConfig tiny_model_config();

/// Four random segments with words {0, 0, 1, 1}, shaped for tiny_model_config().
corpus::Batch tiny_batch(uint64_t seed);

/// Finite-difference check of one loss mode on the tiny model and batch.
nn::GradCheckReport check_gradients(LossMode mode, double eps = 1e-4, int samples = 64,
                                    uint64_t seed = 7);

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_map = 0.0;
  std::optional<double> test_map;
  std::unique_ptr<model::AweModel> best_model;
};

struct CheckpointMeta {
  int epoch = 0;
  double val_map = 0.0;
  features::NormStats norm_stats;
  corpus::SemanticScaler scaler;
  std::vector<std::string> phone_inventory;
  nlohmann::json train_config;
};

void save_checkpoint(const std::filesystem::path& path, model::AweModel& model,
                     const CheckpointMeta& meta);

struct LoadedCheckpoint {
  std::unique_ptr<model::AweModel> model;
  CheckpointMeta meta;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Corpus options that reproduce the normalisation stored in a checkpoint.
corpus::CorpusOptions corpus_options_for(const CheckpointMeta& meta);

/// Runs the optimisation loop. With a non-empty run_dir, writes epochs.csv,
/// checkpoints/epoch_<n> (if save_every_epoch), checkpoints/best and
/// result.json. The best checkpoint is the epoch of maximal validation mAP.
TrainResult train(const corpus::Corpus& corpus, const model::ModelConfig& model_cfg,
                  const TrainConfig& cfg, const std::filesystem::path& run_dir = {});

}  // namespace awe::training

#endif  // AWE_TRAINING_H_
