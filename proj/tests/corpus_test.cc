// awe/corpus_test.cc

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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "awe/corpus.h"
#include "awe/log.h"

namespace awe::corpus {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = fs::temp_directory_path() / ("awe_corpus_test_" + tag);
    fs::remove_all(path_);
    fs::create_directories(path_ / "feats");
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct Row {
  std::string id, word, speaker, split;
  int frames;
};

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

void write_corpus(const fs::path& dir, const std::vector<Row>& rows, const std::string& lexicon,
                  const std::string& semantic) {
  std::ofstream m(dir / "manifest.tsv");
  m << "segment_id\tword\tspeaker\tsplit\tfeature_path\n";
  int k = 0;
  for (const Row& r : rows) {
    Matrix f = Matrix::Constant(r.frames, 39, 0.1 * ++k);
    f.col(0).setLinSpaced(r.frames, 0.0, 1.0);
    features::write_feature_file(dir / "feats" / (r.id + ".feat"), f);
    m << r.id << '\t' << r.word << '\t' << r.speaker << '\t' << r.split << "\tfeats/" << r.id << ".feat\n";
  }
  write_text(dir / "lexicon.txt", lexicon);
  write_text(dir / "semantic.txt", semantic);
}

const char* kLexicon = "cat\tk a t\ndog\td o g\nact\ta k t\n";
const char* kSemantic = "3 2\ncat 0.5 1.0\ndog -0.5 2.0\nact 0.1 3.0\n";

class CorpusTest : public ::testing::Test {
 protected:
  void SetUp() override { set_log_level(LogLevel::kSilent); }
  void TearDown() override { set_log_level(LogLevel::kInfo); }
};

TEST_F(CorpusTest, LoadsCompleteManifest) {
  TempDir d("complete");
  write_corpus(d.path(), {{"a", "cat", "s1", "train", 8}, {"b", "dog", "s2", "valid", 9},
                          {"c", "act", "s3", "test", 10}},
               kLexicon, kSemantic);
  Corpus c = load_corpus_dir(d.path());
  EXPECT_EQ(c.records().size(), 3u);
  EXPECT_EQ(c.skipped(), 0u);
  EXPECT_EQ(c.records()[1].features.rows(), 9);
  EXPECT_TRUE(speakers_disjoint(c));
}

TEST_F(CorpusTest, DropsWordMissingFromSemanticLexicon) {
  TempDir d("drop");
  write_corpus(d.path(), {{"a", "cat", "s1", "train", 8}, {"b", "dog", "s1", "train", 9},
                          {"c", "act", "s1", "train", 10}},
               kLexicon, "2 2\ncat 0.5 1.0\ndog -0.5 2.0\n");
  Corpus c = load_corpus_dir(d.path());
  EXPECT_EQ(c.records().size(), 2u);
  EXPECT_EQ(c.skipped(), 1u);
  EXPECT_NE(c.skip_reasons()[0].find("act"), std::string::npos);
}

TEST_F(CorpusTest, DropsWordMissingFromLexicon) {
  TempDir d("droplex");
  write_corpus(d.path(), {{"a", "cat", "s1", "train", 8}, {"b", "emu", "s1", "train", 9}},
               kLexicon, kSemantic);
  Corpus c = load_corpus_dir(d.path());
  EXPECT_EQ(c.records().size(), 1u);
  EXPECT_EQ(c.skipped(), 1u);
}

TEST_F(CorpusTest, MixedSemanticDimensionsAreFatal) {
  TempDir d("mixed");
  write_corpus(d.path(), {{"a", "cat", "s1", "train", 8}}, kLexicon,
               "3 3\ncat 0.5 1.0 1.0\ndog -0.5 2.0\nact 0.1 3.0 1.0\n");
  EXPECT_THROW(load_corpus_dir(d.path()), Error);
}

TEST_F(CorpusTest, WavManifestExtractsFeatures) {
  TempDir d("wav");
  features::Waveform w;
  for (int i = 0; i < 16000; ++i) w.samples.push_back(std::round(800.0 * std::sin(0.05 * i)));
  features::write_wav(d.path() / "utt.wav", w);
  write_text(d.path() / "manifest.tsv", "a\tcat\ts1\ttrain\tutt.wav\t0.10\t0.40\n");
  write_text(d.path() / "lexicon.txt", kLexicon);
  write_text(d.path() / "semantic.txt", kSemantic);
  CorpusOptions o;
  o.normalize_features = false;
  Corpus c = load_corpus_dir(d.path(), o);
  ASSERT_EQ(c.records().size(), 1u);
  EXPECT_EQ(c.records()[0].features.rows(), (4800 - 400) / 160 + 1);
  EXPECT_EQ(c.records()[0].features.cols(), 39);
}

TEST_F(CorpusTest, NormalisationFitsOnTrainOnly) {
  TempDir d("norm");
  write_corpus(d.path(), {{"a", "cat", "s1", "train", 8}, {"b", "dog", "s1", "train", 9},
                          {"c", "act", "s2", "test", 10}},
               kLexicon, kSemantic);
  Corpus c = load_corpus_dir(d.path());
  ASSERT_FALSE(c.norm_stats().empty());
  Matrix all(17, 39);
  all << c.records()[0].features, c.records()[1].features;
  EXPECT_NEAR(all.col(0).mean(), 0.0, 1e-6);
  EXPECT_NEAR(all.col(5).mean(), 0.0, 1e-6);
  CorpusOptions raw;
  raw.normalize_features = false;
  EXPECT_TRUE(load_corpus_dir(d.path(), raw).norm_stats().empty());
}

TEST(Lexicon, ReservedSymbols) {
  TempDir d("lex");
  write_text(d.path() / "lex.txt", kLexicon);
  Lexicon lex = Lexicon::load(d.path() / "lex.txt");
  EXPECT_EQ(lex.phone_count(), 6);  // a d g k o t
  EXPECT_EQ(lex.eos(), 6);
  EXPECT_EQ(lex.pad(), 7);
  EXPECT_EQ(lex.output_size(), 7);
  for (const char* w : {"cat", "dog", "act"}) {
    for (int p : lex.phones(w)) {
      EXPECT_GE(p, 0);
      EXPECT_LT(p, lex.phone_count());
    }
  }
  EXPECT_EQ(lex.phone_names(lex.phones("cat")), (std::vector<std::string>{"k", "a", "t"}));
  write_text(d.path() / "bad.txt", "cat\t\n");
  EXPECT_THROW(Lexicon::load(d.path() / "bad.txt"), Error);
}

TEST(SemanticScaler, MapsIntoBoundWithConstantDimsAtZero) {
  Vector a(3), b(3), c(3);
  a << 1.0, 10.0, 5.0;
  b << 3.0, -10.0, 5.0;
  c << 2.0, 0.0, 5.0;
  std::vector<const Vector*> v{&a, &b, &c};
  SemanticScaler s = SemanticScaler::fit(v);
  EXPECT_NEAR(s.apply(a)(0), -0.9, 1e-12);
  EXPECT_NEAR(s.apply(b)(0), 0.9, 1e-12);
  EXPECT_NEAR(s.apply(c)(0), 0.0, 1e-12);
  EXPECT_NEAR(s.apply(a)(1), 0.9, 1e-12);
  EXPECT_EQ(s.apply(a)(2), 0.0);
  SemanticScaler r = SemanticScaler::from_json(s.to_json());
  EXPECT_EQ(r.apply(c), s.apply(c));
}

TEST(TypeTokenRatio, Examples) {
  std::vector<std::string> one(4, "w");
  EXPECT_DOUBLE_EQ(type_token_ratio(one), 0.25);
  std::vector<std::string> distinct{"a", "b", "c"};
  EXPECT_DOUBLE_EQ(type_token_ratio(distinct), 1.0);
  std::vector<std::string> table;
  for (int i = 0; i < 27979; ++i) table.push_back(std::to_string(i % 7470));
  EXPECT_NEAR(type_token_ratio(table), 7470.0 / 27979.0, 1e-15);
  EXPECT_NEAR(type_token_ratio(table), 0.267, 5e-4);
  EXPECT_THROW(type_token_ratio(std::vector<std::string>{}), Error);
}

TEST_F(CorpusTest, EmptySplitTtrThrows) {
  TempDir d("ttr");
  write_corpus(d.path(), {{"a", "cat", "s1", "train", 8}}, kLexicon, kSemantic);
  Corpus c = load_corpus_dir(d.path());
  EXPECT_DOUBLE_EQ(type_token_ratio(c, Split::kTrain), 1.0);
  EXPECT_THROW(type_token_ratio(c, Split::kTest), Error);
}

std::vector<size_t> sizes(const std::vector<std::vector<size_t>>& batches) {
  std::vector<size_t> out;
  for (const auto& b : batches) out.push_back(b.size());
  return out;
}

TEST(PlanBatches, PlainShuffleSizes) {
  std::vector<int> labels(10);
  for (int i = 0; i < 10; ++i) labels[i] = i % 3;
  auto plan = plan_batches(labels, 4, 1, false);
  EXPECT_EQ(sizes(plan), (std::vector<size_t>{4, 4, 2}));
  EXPECT_EQ(plan, plan_batches(labels, 4, 1, false));
  EXPECT_NE(plan, plan_batches(labels, 4, 2, false));
}

TEST(PlanBatches, PairBatchesHoldOnlyFullPairs) {
  std::vector<int> labels;
  for (int w = 0; w < 5; ++w) labels.insert(labels.end(), {w, w});
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto plan = plan_batches(labels, 4, seed, true);
    EXPECT_EQ(sizes(plan), (std::vector<size_t>{4, 4, 2}));
    for (const auto& b : plan) {
      std::map<int, int> count;
      for (size_t i : b) ++count[labels[i]];
      for (const auto& [w, n] : count) EXPECT_EQ(n, 2);
      EXPECT_EQ(count.size(), b.size() / 2);
    }
  }
}

TEST(PlanBatches, SingletonOnlySplitIsError) {
  std::vector<int> labels{0, 1, 2, 3};
  try {
    plan_batches(labels, 2, 1, true);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("no positive pairs"), std::string::npos);
  }
}

TEST(PlanBatches, EveryRecordOnceAndAnchorsHavePositives) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 120)(rng);
    const int types = std::uniform_int_distribution<int>(1, 30)(rng);
    std::vector<int> labels(n);
    for (int& l : labels) l = std::uniform_int_distribution<int>(0, types - 1)(rng);
    std::map<int, int> totals;
    for (int l : labels) ++totals[l];
    const bool has_pair = std::any_of(totals.begin(), totals.end(), [](auto& kv) { return kv.second > 1; });
    const size_t batch = std::uniform_int_distribution<size_t>(3, 40)(rng);
    for (bool pairs : {false, true}) {
      if (pairs && !has_pair) {
        EXPECT_THROW(plan_batches(labels, batch, trial, pairs), Error);
        continue;
      }
      auto plan = plan_batches(labels, batch, trial, pairs);
      std::vector<int> seen(n, 0);
      for (const auto& b : plan) {
        EXPECT_LE(b.size(), batch);
        EXPECT_FALSE(b.empty());
        for (size_t i : b) ++seen[i];
        if (!pairs) continue;
        std::map<int, int> count;
        for (size_t i : b) ++count[labels[i]];
        for (size_t i : b) {
          if (totals[labels[i]] > 1) EXPECT_GE(count[labels[i]], 2);
        }
      }
      EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
    }
  }
}

TEST_F(CorpusTest, BatchTargetsReconstructLexicon) {
  TempDir d("batch");
  write_corpus(d.path(), {{"a", "cat", "s1", "train", 8}, {"b", "dog", "s1", "train", 12},
                          {"c", "act", "s1", "train", 6}},
               "cat\tk a t\ndog\td o g x\nact\ta k\n", kSemantic);
  Corpus c = load_corpus_dir(d.path());
  std::vector<size_t> idx{0, 1, 2};
  Batch b = assemble_batch(c, idx);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b.frames.size(), 12u);
  EXPECT_EQ(b.feature_lengths, (std::vector<int>{8, 12, 6}));
  EXPECT_EQ(b.phone_lengths, (std::vector<int>{4, 5, 3}));
  EXPECT_EQ(b.decode_steps(), 5);
  for (size_t i = 0; i < 3; ++i) {
    const SegmentRecord& r = c.records()[i];
    std::vector<int> stripped;
    for (int t = 0; t < b.decode_steps(); ++t) {
      const int p = b.phone_targets(static_cast<Eigen::Index>(i), t);
      if (t < b.phone_lengths[i] - 1) {
        stripped.push_back(p);
      } else if (t == b.phone_lengths[i] - 1) {
        EXPECT_EQ(p, b.eos);
      } else {
        EXPECT_EQ(p, b.pad);
      }
    }
    EXPECT_EQ(stripped, c.lexicon().phones(r.word));
    EXPECT_EQ(b.semantic_targets.row(static_cast<Eigen::Index>(i)).transpose(),
              c.semantic_target(r.word_id));
    for (int t = 0; t < 12; ++t) {
      if (t < r.features.rows()) {
        EXPECT_EQ(b.frames[t].row(static_cast<Eigen::Index>(i)), r.features.row(t));
      } else {
        EXPECT_EQ(b.frames[t].row(static_cast<Eigen::Index>(i)).cwiseAbs().maxCoeff(), 0.0);
      }
    }
  }
}

TEST_F(CorpusTest, SplitStatisticsDuration) {
  TempDir d("stats");
  write_corpus(d.path(), {{"a", "cat", "s1", "train", 8}, {"b", "cat", "s2", "train", 10}},
               kLexicon, kSemantic);
  Corpus c = load_corpus_dir(d.path());
  SplitStats s = split_stats(c, Split::kTrain);
  EXPECT_EQ(s.segments, 2u);
  EXPECT_EQ(s.types, 1u);
  EXPECT_EQ(s.speakers, 2u);
  // ((T − 1)·hop + frame) ms: 0.095 s and 0.115 s.
  EXPECT_NEAR(s.duration_mean, 0.105, 1e-12);
  EXPECT_DOUBLE_EQ(s.ttr, 0.5);
}

TEST_F(CorpusTest, SharedSpeakerIsDetected) {
  TempDir d("shared");
  write_corpus(d.path(), {{"a", "cat", "s1", "train", 8}, {"b", "cat", "s1", "test", 10}},
               kLexicon, kSemantic);
  EXPECT_FALSE(speakers_disjoint(load_corpus_dir(d.path())));
}

}  // namespace
}  // namespace awe::corpus
