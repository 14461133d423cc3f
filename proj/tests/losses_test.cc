// awe/losses_test.cc

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
#include <limits>
#include <random>

#include "awe/losses.h"

namespace awe::losses {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Exhaustive search written out with plain loops. Distances within 1e-12
// count as tied.
std::vector<int> brute_negatives(const Matrix& x, const std::vector<int>& w) {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = -1;
    double best_d = 0.0;
    for (Eigen::Index j = 0; j < x.rows(); ++j) {
      if (w[j] == w[i]) continue;
      double dot = 0.0, ni = 0.0, nj = 0.0;
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        dot += x(i, k) * x(j, k);
        ni += x(i, k) * x(i, k);
        nj += x(j, k) * x(j, k);
      }
      const double d = 1.0 - dot / (std::sqrt(ni) * std::sqrt(nj));
      if (best < 0 || d < best_d - 1e-12) {
        best = static_cast<int>(j);
        best_d = d;
      }
    }
    out.push_back(best);
  }
  return out;
}

TEST(Phonological, UniformLogits) {
  Matrix logits = Matrix::Zero(4, 20);
  std::vector<int> t{3, 7, 1, 19};
  EXPECT_NEAR(phonological_loss(logits, t, 21), 4.0 * std::log(20.0), 1e-12);
  EXPECT_NEAR(phonological_loss(logits, t, 21), 11.983, 5e-4);
}

TEST(Phonological, ConfidentCorrectTendsToZero) {
  std::vector<int> t{1, 0, 2};
  double prev = std::numeric_limits<double>::infinity();
  for (double margin : {1.0, 5.0, 20.0, 50.0}) {
    Matrix logits = Matrix::Zero(3, 4);
    for (int s = 0; s < 3; ++s) logits(s, t[s]) = margin;
    const double l = phonological_loss(logits, t, 5);
    EXPECT_LT(l, prev);
    EXPECT_GE(l, 0.0);
    prev = l;
  }
  EXPECT_LT(prev, 1e-20);
}

TEST(Phonological, MatchesLogSoftmaxSum) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 3.0);
  Matrix logits(4, 7);
  for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = g(rng);
  std::vector<int> t{2, 5, 0, 6};
  double want = 0.0;
  for (int s = 0; s < 4; ++s) {
    double z = 0.0;
    for (int v = 0; v < 7; ++v) z += std::exp(logits(s, v));
    want -= std::log(std::exp(logits(s, t[s])) / z);
  }
  EXPECT_NEAR(phonological_loss(logits, t, 8), want, 1e-12);
}

TEST(Phonological, PadRowsSkippedAndPadOnlyRejected) {
  Matrix logits = Matrix::Zero(3, 5);
  std::vector<int> t{1, 4, 6};
  EXPECT_NEAR(phonological_loss(logits, t, 6), 2.0 * std::log(5.0), 1e-12);
  std::vector<int> pads{6, 6, 6};
  EXPECT_THROW(phonological_loss(logits, pads, 6), Error);
}

TEST(Phonological, GraphMatchesScalarPerSegment) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  const int B = 3, S = 4, V = 6, pad = 7;
  Eigen::MatrixXi targets(B, S);
  targets << 0, 1, 5, pad, 2, 5, pad, pad, 3, 3, 1, 5;
  nn::Tape tape;
  std::vector<nn::Var> logits;
  std::vector<Matrix> raw;
  for (int s = 0; s < S; ++s) {
    Matrix m(B, V);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    raw.push_back(m);
    logits.push_back(tape.constant(m));
  }
  nn::Var per = phonological_loss(logits, targets, pad);
  for (int i = 0; i < B; ++i) {
    Matrix li(S, V);
    std::vector<int> ti;
    for (int s = 0; s < S; ++s) {
      li.row(s) = raw[s].row(i);
      ti.push_back(targets(i, s));
    }
    EXPECT_NEAR(per.value()(i, 0), phonological_loss(li, ti, pad), 1e-12);
  }
}

TEST(Semantic, Examples) {
  Vector v = Vector::Random(300);
  EXPECT_EQ(semantic_loss(v, v), 0.0);
  Vector t = Vector::Zero(300);
  Vector w = t;
  w(0) = 3.0;
  w(1) = 4.0;
  EXPECT_DOUBLE_EQ(semantic_loss(w, t), 5.0);
  Vector a = Vector::Random(300), b = Vector::Random(300);
  double sq = 0.0;
  for (int k = 0; k < 300; ++k) sq += (a(k) - b(k)) * (a(k) - b(k));
  EXPECT_NEAR(semantic_loss(a, b), std::sqrt(sq), 1e-12);
  EXPECT_THROW(semantic_loss(Vector::Zero(3), Vector::Zero(4)), Error);
}

TEST(Semantic, TriangleInequality) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    Vector a(8), b(8), c(8);
    for (int k = 0; k < 8; ++k) {
      a(k) = g(rng);
      b(k) = g(rng);
      c(k) = g(rng);
    }
    EXPECT_LE(semantic_loss(a, c), semantic_loss(a, b) + semantic_loss(b, c) + 1e-12);
    EXPECT_GT(semantic_loss(a, b), 0.0);
  }
}

TEST(Semantic, GraphMatchesScalarAndGradientIsUnitDifference) {
  Matrix v(2, 3), t(2, 3);
  v << 1, 2, 3, 0, 0, 1;
  t << 1, 2, 3, 3, 4, 1;
  nn::ParamTensor p("v", v);
  p.zero_grad();
  nn::Tape tape;
  nn::Var per = semantic_loss(tape.param(p), tape.constant(t));
  EXPECT_NEAR(per.value()(0, 0), 1e-6, 1e-9);  // sqrt(eps) guard at zero
  EXPECT_NEAR(per.value()(1, 0), 5.0, 1e-12);
  tape.backward(nn::sum(per));
  EXPECT_NEAR(p.grad(1, 0), -0.6, 1e-12);
  EXPECT_NEAR(p.grad(1, 1), -0.8, 1e-12);
  EXPECT_EQ(p.grad.row(0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Joint, Examples) {
  EXPECT_DOUBLE_EQ(joint_loss(2, 3, 1, 1), 5.0);
  EXPECT_DOUBLE_EQ(joint_loss(2, 3, 1, 0), 2.0);
  EXPECT_DOUBLE_EQ(joint_loss(4, 1, 0.5, 2), 4.0);
  EXPECT_THROW(joint_loss(1, 1, 0, 0), ConfigError);
  EXPECT_THROW(joint_loss(1, 1, -1, 1), ConfigError);
}

TEST(Cosine, Examples) {
  Vector a = vec({1, 2, 3});
  EXPECT_NEAR(cosine_distance(a, a), 0.0, 1e-12);
  EXPECT_NEAR(cosine_distance(vec({1, 0}), vec({0, 5})), 1.0, 1e-12);
  EXPECT_NEAR(cosine_distance(a, -a), 2.0, 1e-12);
  EXPECT_THROW(cosine_distance(a, Vector::Zero(3)), Error);
}

TEST(Triplet, HingeExamples) {
  EXPECT_DOUBLE_EQ(triplet_hinge(0.0, 1.0, 0.4), 0.0);
  EXPECT_DOUBLE_EQ(triplet_hinge(0.5, 0.5, 0.4), 0.4);
  EXPECT_NEAR(triplet_hinge(0.9, 0.2, 0.4), 1.1, 1e-15);
}

TEST(Triplet, ZeroWhenMarginSatisfied) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    Vector a(5), p(5), n(5);
    for (int k = 0; k < 5; ++k) {
      a(k) = g(rng);
      p(k) = g(rng);
      n(k) = g(rng);
    }
    if (cosine_distance(a, n) >= cosine_distance(a, p) + 0.4) {
      EXPECT_EQ(triplet_loss(a, p, n), 0.0);
      ++checked;
    }
    EXPECT_GE(triplet_loss(a, p, n), 0.0);
    EXPECT_NEAR(triplet_loss(3.0 * a, 0.5 * p, 7.0 * n), triplet_loss(a, p, n), 1e-12);
  }
  EXPECT_GT(checked, 100);
}

TEST(HardNegatives, HandSetBatch) {
  Matrix x(4, 2);
  x << 1, 0, 0.9, 0.1, 0, 1, 0.8, 0.6;
  std::vector<int> w{0, 0, 1, 1};
  auto neg = mine_hard_negatives(x, w);
  EXPECT_EQ(neg, brute_negatives(x, w));
  EXPECT_EQ(neg, (std::vector<int>{3, 3, 1, 1}));
}

TEST(HardNegatives, SingleEligibleAndTies) {
  Matrix x(3, 2);
  x << 1, 0, 2, 0, 0, 1;
  EXPECT_EQ(mine_hard_negatives(x, std::vector<int>{0, 0, 1})[0], 2);
  Matrix dup(4, 2);
  dup << 1, 0, 0, 1, 0, 1, 0, 2;
  EXPECT_EQ(mine_hard_negatives(dup, std::vector<int>{0, 1, 1, 1})[0], 1);
  EXPECT_THROW(mine_hard_negatives(dup, std::vector<int>{0, 0, 0, 0}), Error);
}

TEST(HardNegatives, MatchesExhaustiveSearchAndIsScaleInvariant) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int B = std::uniform_int_distribution<int>(2, 64)(rng);
    const int types = std::uniform_int_distribution<int>(2, std::max(2, B / 2))(rng);
    const int D = std::uniform_int_distribution<int>(1, 6)(rng);
    Matrix x(B, D);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      // Coarse values so exact ties occur.
      x.data()[i] = std::round(2.0 * g(rng)) / 2.0;
    }
    for (Eigen::Index i = 0; i < B; ++i) {
      if (x.row(i).norm() == 0.0) x(i, 0) = 1.0;
    }
    std::vector<int> w(B);
    for (int& l : w) l = std::uniform_int_distribution<int>(0, types - 1)(rng);
    w[0] = 0;
    w[1] = 1;
    EXPECT_EQ(mine_hard_negatives(x, w), brute_negatives(x, w));
    EXPECT_EQ(mine_hard_negatives(2.5 * x, w), mine_hard_negatives(x, w));
  }
}

TEST(TripletTerms, GraphMatchesScalar) {
  Matrix x(5, 3);
  x << 1, 0, 0, 0.8, 0.3, 0, 0, 1, 0, 0.2, 0.9, 0.1, 0, 0, 1;
  std::vector<int> w{0, 0, 1, 1, 2};
  nn::Tape tape;
  TripletTerms t = triplet_terms(tape.constant(x), w, 0.4);
  EXPECT_EQ(t.anchors, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(t.positives, (std::vector<int>{1, 0, 3, 2}));
  auto neg = mine_hard_negatives(x, w);
  for (size_t k = 0; k < t.anchors.size(); ++k) {
    const int i = t.anchors[k];
    EXPECT_EQ(t.negatives[k], neg[i]);
    EXPECT_NEAR(t.per_anchor.value()(static_cast<Eigen::Index>(k), 0),
                triplet_loss(x.row(i).transpose(), x.row(t.positives[k]).transpose(),
                             x.row(t.negatives[k]).transpose()),
                1e-12);
  }
  std::vector<int> single{0, 1, 2, 3, 4};
  EXPECT_FALSE(triplet_terms(tape.constant(x), single, 0.4).per_anchor.valid());
}

}  // namespace
}  // namespace awe::losses
