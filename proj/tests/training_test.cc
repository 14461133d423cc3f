// awe/training_test.cc

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


#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "awe/evaluation.h"
#include "awe/synthgen.h"
#include "awe/training.h"

namespace awe::training {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small speaker-disjoint corpus, written once per process.
const corpus::Corpus& small_corpus() {
  static const corpus::Corpus c = [] {
    synth::SynthConfig sc;
    sc.n_word_types = 5;
    sc.n_phones = 8;
    sc.n_speakers = 4;
    sc.exemplars_per_speaker_per_word = 2;
    sc.semantic_dim = 6;
    sc.semantic_cluster_count = 2;
    const fs::path dir = fs::temp_directory_path() / "awe_training_test_corpus";
    fs::remove_all(dir);
    synth::write_corpus(synth::generate_corpus(sc), dir);
    return corpus::load_corpus_dir(dir);
  }();
  return c;
}

model::ModelConfig small_model() {
  model::ModelConfig m;
  m.conv_filters = 6;
  m.gru_layers = 1;
  m.hidden = 8;
  m.dropout = 0.1;
  return m;
}

TrainConfig small_train(LossMode mode, int epochs) {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = 8;
  t.loss_mode = mode;
  t.deterministic = true;
  return t;
}

TEST(AdamTest, ZeroGradientLeavesParams) {
  nn::ParamTensor p("p", Matrix::Constant(2, 3, 0.7));
  p.zero_grad();
  nn::ParamTensor* ps[] = {&p};
  AdamState s;
  for (int i = 0; i < 3; ++i) adam_step(ps, s, 1e-2);
  EXPECT_EQ(p.value, Matrix::Constant(2, 3, 0.7));
}

TEST(AdamTest, FirstStepIsSignedLr) {
  Matrix g(1, 4);
  g << 3.0, -0.2, 1e-3, -50.0;
  nn::ParamTensor p("p", Matrix::Zero(1, 4));
  p.grad = g;
  nn::ParamTensor* ps[] = {&p};
  AdamState s;
  adam_step(ps, s, 0.01);
  for (int j = 0; j < 4; ++j) {
    const double expect = -0.01 * (g(0, j) > 0 ? 1.0 : -1.0);
    EXPECT_NEAR(p.value(0, j), expect, 1e-4 * 0.01 + 1e-5 / std::abs(g(0, j)) * 0.01);
  }
}

TEST(AdamTest, MatchesScalarOracleOnQuadratic) {
  // f(p) = p²/2 from p = 1, gradient p.
  const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double q = 1.0, m = 0.0, v = 0.0;
  nn::ParamTensor p("p", Matrix::Constant(1, 1, 1.0));
  nn::ParamTensor* ps[] = {&p};
  AdamState s;
  for (int t = 1; t <= 3; ++t) {
    const double g = q;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    q -= lr * mh / (std::sqrt(vh) + eps);

    p.grad = p.value;
    adam_step(ps, s, lr);
    EXPECT_NEAR(p.value(0, 0), q, 1e-14);
  }
}

TEST(AdamTest, NonFiniteGradientThrowsBeforeUpdate) {
  nn::ParamTensor a("a", Matrix::Ones(2, 2));
  nn::ParamTensor b("b", Matrix::Ones(2, 2));
  a.grad = Matrix::Ones(2, 2);
  b.grad = Matrix::Ones(2, 2);
  b.grad(1, 0) = std::numeric_limits<double>::quiet_NaN();
  nn::ParamTensor* ps[] = {&a, &b};
  AdamState s;
  EXPECT_THROW(adam_step(ps, s, 0.1), Error);
  EXPECT_EQ(a.value, Matrix::Ones(2, 2));
  EXPECT_EQ(b.value, Matrix::Ones(2, 2));
}

TEST(SchedulerTest, ImprovingKeepsLr) {
  std::vector<double> h;
  for (int i = 0; i < 30; ++i) h.push_back(0.1 + 0.01 * i);
  for (double lr : plateau_schedule(h, 1e-3, 10, 0.5)) EXPECT_EQ(lr, 1e-3);
}

// Hand trace with patience 10: epoch 1 sets the reference, epochs 2..11 are
// the ten non-improving epochs, so the halving lands after epoch 11. Epoch 12
// starts a fresh window and epochs 13..22 trigger the second halving.
TEST(SchedulerTest, FlatHistoryHalvesAtElevenAndTwentyTwo) {
  const std::vector<double> flat11(11, 0.5);
  const auto s11 = plateau_schedule(flat11, 1.0, 10, 0.5);
  for (int e = 1; e <= 10; ++e) EXPECT_EQ(s11[e - 1], 1.0) << e;
  EXPECT_EQ(s11[10], 0.5);
  EXPECT_EQ(plateau_scheduler(flat11, 1.0), 0.5);

  const std::vector<double> flat22(22, 0.5);
  const auto s22 = plateau_schedule(flat22, 1.0, 10, 0.5);
  int halvings = 0;
  for (size_t e = 1; e < s22.size(); ++e) {
    if (s22[e] < s22[e - 1]) {
      ++halvings;
      EXPECT_TRUE(e + 1 == 11 || e + 1 == 22) << e + 1;
    }
  }
  EXPECT_EQ(halvings + (s22[0] < 1.0 ? 1 : 0), 2);
  EXPECT_EQ(s22.back(), 0.25);
}

TEST(SchedulerTest, ImprovementResetsCounter) {
  std::vector<double> h(9, 0.5);
  h.push_back(0.6);  // epoch 10 improves
  h.insert(h.end(), 9, 0.6);
  const auto s = plateau_schedule(h, 1.0, 10, 0.5);
  for (double lr : s) EXPECT_EQ(lr, 1.0);
  h.push_back(0.6);
  EXPECT_EQ(plateau_schedule(h, 1.0, 10, 0.5).back(), 0.5);
}

TEST(SchedulerTest, LrIsPowerOfFactorAndNonIncreasing) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> h;
    double level = 0.2;
    for (int e = 0; e < 120; ++e) {
      if (u(rng) < 0.1) level += 0.01;
      h.push_back(level);
    }
    const auto s = plateau_schedule(h, 1e-3, 1 + t % 5, 0.5, 1e-6);
    double prev = 1e-3;
    for (double lr : s) {
      EXPECT_LE(lr, prev);
      EXPECT_GE(lr, 1e-6);
      const double k = std::log(lr / 1e-3) / std::log(0.5);
      EXPECT_NEAR(k, std::round(k), 1e-9);
      prev = lr;
    }
  }
}

TEST(SchedulerTest, Validation) {
  EXPECT_THROW(PlateauScheduler(1.0, 0, 0.5), ConfigError);
  EXPECT_THROW(PlateauScheduler(1.0, 3, 1.0), ConfigError);
  EXPECT_THROW(plateau_scheduler(std::vector<double>{}, 1.0), Error);
}

TEST(TrainConfigTest, ValidationAndWeights) {
  TrainConfig t;
  EXPECT_NO_THROW(t.validate());
  t.epochs = 0;
  EXPECT_THROW(t.validate(), ConfigError);
  t = TrainConfig{};
  t.lr_factor = 1.0;
  EXPECT_THROW(t.validate(), ConfigError);
  t = TrainConfig{};
  t.alpha = 0.3;
  t.beta = 0.7;
  EXPECT_EQ(t.effective_alpha(), 0.3);
  EXPECT_EQ(t.effective_beta(), 0.7);
  t.loss_mode = LossMode::kFormOnly;
  EXPECT_EQ(t.effective_alpha(), 1.0);
  EXPECT_EQ(t.effective_beta(), 0.0);
  t.loss_mode = LossMode::kMeaningOnly;
  EXPECT_EQ(t.effective_alpha(), 0.0);
  EXPECT_EQ(t.effective_beta(), 1.0);
  EXPECT_EQ(parse_loss_mode("contrastive"), LossMode::kContrastive);
  EXPECT_THROW(parse_loss_mode("joint"), ConfigError);
}

TEST(EpochCsvTest, RowFormat) {
  EpochLog e;
  e.epoch = 3;
  e.train.phi = 1.5;
  e.train.lambda = 0.25;
  e.train.total = 1.75;
  e.val_map = 0.5;
  e.lr = 1e-3;
  EXPECT_EQ(epoch_csv_row(e), "3,1.5,0.25,0,1.75,0.5,0.001,0.000");
}

double grad_abs_sum(std::span<nn::ParamTensor* const> ps) {
  double s = 0.0;
  for (auto* p : ps) s += p->grad.cwiseAbs().sum();
  return s;
}

TEST(ObjectiveTest, GradientIsolationByMode) {
  const corpus::Batch batch = tiny_batch(3);
  for (LossMode mode : {LossMode::kFormOnly, LossMode::kMeaningOnly, LossMode::kFormMeaning,
                        LossMode::kContrastive}) {
    model::AweModel m(tiny_model_config(), 5);
    auto all = m.parameters();
    nn::zero_grads(all);
    nn::Tape tape;
    nn::RngState rng(1);
    TrainConfig t;
    t.loss_mode = mode;
    Objective o = compute_objective(tape, m, batch, LossSpec::from(t), true, rng);
    ASSERT_TRUE(o.total.valid());
    tape.backward(o.total);
    const bool decoder = mode == LossMode::kFormOnly || mode == LossMode::kFormMeaning;
    const bool regressor = mode == LossMode::kMeaningOnly || mode == LossMode::kFormMeaning;
    EXPECT_EQ(grad_abs_sum(m.decoder_parameters()) > 0.0, decoder) << loss_mode_name(mode);
    EXPECT_EQ(grad_abs_sum(m.regressor_parameters()) > 0.0, regressor) << loss_mode_name(mode);
    EXPECT_GT(grad_abs_sum(m.encoder_parameters()), 0.0);
  }
}

TEST(ObjectiveTest, ZeroWeightIsolatesBranch) {
  const corpus::Batch batch = tiny_batch(4);
  for (double alpha : {0.0, 1.0}) {
    model::AweModel m(tiny_model_config(), 6);
    auto all = m.parameters();
    nn::zero_grads(all);
    nn::Tape tape;
    nn::RngState rng(1);
    LossSpec spec{LossMode::kFormMeaning, alpha, 1.0 - alpha};
    Objective o = compute_objective(tape, m, batch, spec, true, rng);
    tape.backward(o.total);
    for (auto* p : alpha == 0.0 ? m.decoder_parameters() : m.regressor_parameters()) {
      EXPECT_TRUE((p->grad.array() == 0.0).all()) << p->name;
    }
  }
}

TEST(ObjectiveTest, BreakdownMatchesWeights) {
  const corpus::Batch batch = tiny_batch(9);
  model::AweModel m(tiny_model_config(), 2);
  nn::Tape tape;
  nn::RngState rng(1);
  LossSpec spec{LossMode::kFormMeaning, 0.3, 2.0};
  Objective o = compute_objective(tape, m, batch, spec, false, rng);
  EXPECT_NEAR(o.breakdown.total, 0.3 * o.breakdown.phi + 2.0 * o.breakdown.lambda, 1e-12);
  EXPECT_NEAR(o.total.scalar(), o.breakdown.total, 1e-12);
}

TEST(GradCheckTest, AllModesPass) {
  for (LossMode mode : {LossMode::kFormOnly, LossMode::kMeaningOnly, LossMode::kFormMeaning,
                        LossMode::kContrastive}) {
    const nn::GradCheckReport r = check_gradients(mode, 1e-4, 32);
    EXPECT_TRUE(r.passed()) << loss_mode_name(mode) << " rel " << r.max_rel_error << " at "
                            << r.worst_param;
  }
}

TEST(TrainTest, OneEpochWritesOneLogAndCheckpoint) {
  const fs::path dir = fs::temp_directory_path() / "awe_training_test_one";
  fs::remove_all(dir);
  TrainResult r = train(small_corpus(), small_model(), small_train(LossMode::kFormMeaning, 1), dir);
  ASSERT_EQ(r.log.size(), 1u);
  EXPECT_EQ(r.log[0].epoch, 1);
  EXPECT_EQ(r.best_epoch, 1);
  EXPECT_TRUE(fs::exists(dir / "checkpoints" / "epoch_1"));
  EXPECT_FALSE(fs::exists(dir / "checkpoints" / "epoch_2"));
  EXPECT_TRUE(fs::exists(dir / "checkpoints" / "best"));
  EXPECT_EQ(slurp(dir / "checkpoints" / "best"), slurp(dir / "checkpoints" / "epoch_1"));
  std::ifstream csv(dir / "epochs.csv");
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  EXPECT_EQ(lines, 2);
  EXPECT_TRUE(fs::exists(dir / "result.json"));
  fs::remove_all(dir);
}

TEST(TrainTest, DeterministicRunsGiveIdenticalCsv) {
  const fs::path a = fs::temp_directory_path() / "awe_training_test_det_a";
  const fs::path b = fs::temp_directory_path() / "awe_training_test_det_b";
  fs::remove_all(a);
  fs::remove_all(b);
  TrainConfig t = small_train(LossMode::kFormMeaning, 3);
  t.save_every_epoch = false;
  train(small_corpus(), small_model(), t, a);
  train(small_corpus(), small_model(), t, b);
  EXPECT_EQ(slurp(a / "epochs.csv"), slurp(b / "epochs.csv"));
  t.seed = 2;
  fs::remove_all(b);
  train(small_corpus(), small_model(), t, b);
  EXPECT_NE(slurp(a / "epochs.csv"), slurp(b / "epochs.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(TrainTest, BestCheckpointIsArgmaxValidation) {
  const fs::path dir = fs::temp_directory_path() / "awe_training_test_best";
  fs::remove_all(dir);
  TrainConfig t = small_train(LossMode::kContrastive, 6);
  TrainResult r = train(small_corpus(), small_model(), t, dir);
  int argmax = 1;
  for (const EpochLog& e : r.log)
    if (e.val_map > r.log[argmax - 1].val_map) argmax = e.epoch;
  EXPECT_EQ(r.best_epoch, argmax);
  EXPECT_EQ(r.best_val_map, r.log[argmax - 1].val_map);

  LoadedCheckpoint ck = load_checkpoint(dir / "checkpoints" / "best");
  EXPECT_EQ(ck.meta.epoch, argmax);
  const eval::EmbeddingSet valid =
      eval::embed_split(*ck.model, small_corpus(), corpus::Split::kValid);
  EXPECT_EQ(eval::same_different_map(valid).map, r.best_val_map);
  ASSERT_TRUE(r.test_map.has_value());
  const eval::EmbeddingSet test = eval::embed_split(*ck.model, small_corpus(), corpus::Split::kTest);
  EXPECT_EQ(eval::same_different_map(test).map, *r.test_map);
  fs::remove_all(dir);
}

TEST(TrainTest, LoggedLrFollowsScheduler) {
  TrainConfig t = small_train(LossMode::kFormOnly, 5);
  t.lr_patience = 1;
  TrainResult r = train(small_corpus(), small_model(), t);
  std::vector<double> h;
  for (const EpochLog& e : r.log) h.push_back(e.val_map);
  const auto s = plateau_schedule(h, t.lr, t.lr_patience, t.lr_factor, t.min_lr);
  EXPECT_EQ(r.log[0].lr, t.lr);
  for (size_t e = 1; e < r.log.size(); ++e) EXPECT_EQ(r.log[e].lr, s[e - 1]);
}

TEST(TrainTest, SkippedBranchesLogZero) {
  TrainResult f = train(small_corpus(), small_model(), small_train(LossMode::kFormOnly, 1));
  EXPECT_GT(f.log[0].train.phi, 0.0);
  EXPECT_EQ(f.log[0].train.lambda, 0.0);
  TrainResult m = train(small_corpus(), small_model(), small_train(LossMode::kMeaningOnly, 1));
  EXPECT_EQ(m.log[0].train.phi, 0.0);
  EXPECT_GT(m.log[0].train.lambda, 0.0);
  TrainResult c = train(small_corpus(), small_model(), small_train(LossMode::kContrastive, 1));
  EXPECT_EQ(c.log[0].train.phi, 0.0);
  EXPECT_EQ(c.log[0].train.lambda, 0.0);
  EXPECT_GT(c.log[0].train.anchors, 0u);
}

}  // namespace
}  // namespace awe::training
