// awe/evaluation_test.cc

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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <tuple>

#include "awe/evaluation.h"

namespace awe::eval {
namespace {

namespace fs = std::filesystem;

EmbeddingSet make_set(const Matrix& x, const std::vector<std::string>& words) {
  EmbeddingSet s;
  s.vectors = x;
  s.words = words;
  for (size_t i = 0; i < words.size(); ++i) {
    s.segment_ids.push_back("seg" + std::to_string(i));
    s.speakers.push_back("spk" + std::to_string(i % 3));
  }
  return s;
}

EmbeddingSet random_set(std::mt19937_64& rng, int n, int dim, int types) {
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> w(0, types - 1);
  Matrix x(n, dim);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < dim; ++d) x(i, d) = g(rng);
  std::vector<std::string> words;
  for (int i = 0; i < n; ++i) words.push_back("w" + std::to_string(w(rng)));
  // Guarantee one same-word pair.
  words[1] = words[0];
  return make_set(x, words);
}

double plain_cosine(const Matrix& x, int i, int j) {
  double dot = 0.0, ni = 0.0, nj = 0.0;
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    dot += x(i, k) * x(j, k);
    ni += x(i, k) * x(i, k);
    nj += x(j, k) * x(j, k);
  }
  return 1.0 - dot / (std::sqrt(ni) * std::sqrt(nj));
}

// Pooled pair ranking and AP written out directly.
double brute_map(const EmbeddingSet& s) {
  const int n = static_cast<int>(s.size());
  std::vector<std::tuple<double, int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(plain_cosine(s.vectors, i, j), i, j);
  std::sort(pairs.begin(), pairs.end());
  double hits = 0.0, sum = 0.0;
  for (size_t k = 0; k < pairs.size(); ++k) {
    const auto [d, i, j] = pairs[k];
    if (s.words[i] != s.words[j]) continue;
    hits += 1.0;
    sum += hits / static_cast<double>(k + 1);
  }
  return sum / hits;
}

double brute_purity(const EmbeddingSet& s, int k) {
  const int n = static_cast<int>(s.size());
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    std::vector<bool> taken(n, false);
    taken[i] = true;
    int same = 0;
    for (int m = 0; m < k; ++m) {
      int best = -1;
      for (int j = 0; j < n; ++j) {
        if (taken[j]) continue;
        if (best < 0 || plain_cosine(s.vectors, i, j) < plain_cosine(s.vectors, i, best)) best = j;
      }
      taken[best] = true;
      if (s.words[best] == s.words[i]) ++same;
    }
    total += static_cast<double>(same) / k;
  }
  return total / n;
}

TEST(AveragePrecisionTest, Examples) {
  const std::vector<int> a{1, 0, 1};
  EXPECT_EQ(average_precision(a), 5.0 / 6.0);
  EXPECT_EQ(average_precision(std::vector<int>(7, 1)), 1.0);
  for (int len : {2, 10, 1000}) {
    std::vector<int> r(len, 0);
    r.back() = 1;
    EXPECT_EQ(average_precision(r), 1.0 / len);
  }
  EXPECT_THROW(average_precision(std::vector<int>(4, 0)), Error);
}

TEST(SameDifferentTest, PerfectSeparation) {
  Matrix x(4, 2);
  x << 1, 0, 1, 0, 0, 1, 0, 1;
  const MapResult r = same_different_map(make_set(x, {"a", "a", "b", "b"}));
  EXPECT_EQ(r.map, 1.0);
  EXPECT_EQ(r.n, 4u);
  EXPECT_EQ(r.n_positive_pairs, 2u);
}

TEST(SameDifferentTest, HandSetMatchesBruteForce) {
  Matrix x(6, 2);
  x << 1.0, 0.2, 0.9, -0.1, -0.3, 1.0, 0.8, 0.7, -1.0, 0.4, 0.1, -1.0;
  const EmbeddingSet s = make_set(x, {"a", "a", "b", "b", "a", "b"});
  EXPECT_NEAR(same_different_map(s).map, brute_map(s), 1e-12);
}

TEST(SameDifferentTest, RandomSetsMatchBruteForce) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> size(4, 100);
  for (int t = 0; t < 30; ++t) {
    const EmbeddingSet s = random_set(rng, size(rng), 5, 6);
    EXPECT_NEAR(same_different_map(s).map, brute_map(s), 1e-12);
  }
}

TEST(SameDifferentTest, TiesFollowPairOrder) {
  // Every pair is at distance 0; the canonical order puts (0,1) first.
  Matrix x = Matrix::Ones(3, 2);
  EXPECT_EQ(same_different_map(make_set(x, {"a", "a", "b"})).map, 1.0);
  EXPECT_EQ(same_different_map(make_set(x, {"b", "a", "a"})).map, 1.0 / 3.0);
}

TEST(SameDifferentTest, Errors) {
  Matrix x(3, 2);
  x << 1, 0, 0, 1, 1, 1;
  EXPECT_THROW(same_different_map(make_set(x, {"a", "b", "c"})), Error);
  Matrix z(2, 2);
  z << 1, 0, 0, 0;
  EXPECT_THROW(same_different_map(make_set(z, {"a", "a"})), Error);
  EmbeddingSet bad = make_set(x, {"a", "a", "b"});
  bad.speakers.pop_back();
  EXPECT_THROW(same_different_map(bad), Error);
}

TEST(SameDifferentTest, PermutationBaseline) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const int types = 8, per = 5, n = types * per;
  Matrix x(n, 6);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < 6; ++d) x(i, d) = g(rng);
  std::vector<std::string> words;
  for (int i = 0; i < n; ++i) words.push_back("w" + std::to_string(i % types));
  const double prevalence =
      static_cast<double>(types * per * (per - 1) / 2) / (n * (n - 1) / 2);
  double mean = 0.0;
  const int perms = 200;
  for (int p = 0; p < perms; ++p) {
    std::shuffle(words.begin(), words.end(), rng);
    mean += same_different_map(make_set(x, words)).map / perms;
  }
  EXPECT_NEAR(mean, prevalence, 0.02);
}

TEST(SameDifferentTest, Invariances) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 10; ++t) {
    EmbeddingSet s = random_set(rng, 30, 4, 5);
    const double base = same_different_map(s).map;

    EmbeddingSet scaled = s;
    scaled.vectors *= 3.7;
    EXPECT_NEAR(same_different_map(scaled).map, base, 1e-12);

    std::normal_distribution<double> g;
    Matrix m(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m(i, j) = g(rng);
    const Matrix q = Eigen::HouseholderQR<Matrix>(m).householderQ();
    EmbeddingSet rotated = s;
    rotated.vectors = s.vectors * q;
    EXPECT_NEAR(same_different_map(rotated).map, base, 1e-12);

    EmbeddingSet relabeled = s;
    for (auto& spk : relabeled.speakers) spk = "other_" + spk;
    EXPECT_EQ(same_different_map(relabeled).map, base);
  }
}

TEST(SameDifferentTest, CollapsedClustersWithSmallNoise) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  const int types = 4, per = 4;
  Matrix x = Matrix::Zero(types * per, types);
  std::vector<std::string> words;
  for (int i = 0; i < types * per; ++i) {
    x(i, i % types) = 1.0;
    words.push_back("w" + std::to_string(i % types));
  }
  EXPECT_EQ(same_different_map(make_set(x, words)).map, 1.0);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index d = 0; d < x.cols(); ++d) x(i, d) += u(rng);
  EXPECT_EQ(same_different_map(make_set(x, words)).map, 1.0);
}

TEST(ExportTest, RoundTrip) {
  std::mt19937_64 rng(8);
  const EmbeddingSet s = random_set(rng, 3, 4, 2);
  const fs::path p = fs::temp_directory_path() / "awe_eval_export.tsv";
  export_embeddings(s, p);

  std::ifstream in(p);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), '\t'), 6);
  }
  EXPECT_EQ(rows, 3);

  const EmbeddingSet back = import_embeddings(p);
  EXPECT_EQ(back.segment_ids, s.segment_ids);
  EXPECT_EQ(back.words, s.words);
  EXPECT_EQ(back.speakers, s.speakers);
  EXPECT_LT((back.vectors - s.vectors).cwiseAbs().maxCoeff(), 1e-7);
  fs::remove(p);
}

TEST(ExportTest, Errors) {
  EmbeddingSet empty;
  EXPECT_THROW(export_embeddings(empty, fs::temp_directory_path() / "awe_eval_empty.tsv"), Error);
  std::mt19937_64 rng(8);
  EXPECT_THROW(export_embeddings(random_set(rng, 3, 2, 2), "/nonexistent_dir/x.tsv"), Error);
}

TEST(NeighborPurityTest, Examples) {
  const int types = 3, per = 4;
  Matrix x = Matrix::Zero(types * per, types);
  std::vector<std::string> words;
  for (int i = 0; i < types * per; ++i) {
    x(i, i % types) = 1.0;
    words.push_back("w" + std::to_string(i % types));
  }
  EXPECT_EQ(neighbor_purity(make_set(x, words), per - 1), 1.0);

  Matrix y(4, 2);
  y << 1, 0, 0, 1, -1, 0.1, 0.3, -1;
  EXPECT_EQ(neighbor_purity(make_set(y, {"a", "b", "c", "d"}), 1), 0.0);
  EXPECT_THROW(neighbor_purity(make_set(y, {"a", "a", "c", "d"}), 4), Error);
  EXPECT_THROW(neighbor_purity(make_set(y, {"a", "a", "c", "d"}), 0), Error);
}

TEST(NeighborPurityTest, MatchesBruteForce) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 10; ++t) {
    const EmbeddingSet s = random_set(rng, 12, 3, 3);
    for (int k : {1, 3, 7}) EXPECT_NEAR(neighbor_purity(s, k), brute_purity(s, k), 1e-12);
  }
}

}  // namespace
}  // namespace awe::eval
