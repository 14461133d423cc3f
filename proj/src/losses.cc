// awe/losses.cc

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

#include "awe/losses.h"

#include <cmath>
#include <limits>

namespace awe::losses {

double phonological_loss(const Matrix& logits, std::span<const int> targets, int pad) {
  if (logits.rows() != static_cast<Eigen::Index>(targets.size())) {
    throw Error("phonological_loss: logits rows must match target length");
  }
  double loss = 0.0;
  bool any = false;
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const int target = targets[t];
    if (target == pad) continue;
    if (target < 0 || target >= logits.cols()) throw Error("phonological_loss: bad target");
    any = true;
    const double mx = logits.row(t).maxCoeff();
    const double lse = mx + std::log((logits.row(t).array() - mx).exp().sum());
    loss += lse - logits(t, target);
  }
  if (!any) throw Error("phonological_loss: target holds only padding");
  return loss;
}

double semantic_loss(const Vector& v, const Vector& target) {
  if (v.size() != target.size()) throw Error("semantic_loss: dimension mismatch");
  return (v - target).norm();
}

double joint_loss(double phi, double lambda, double alpha, double beta) {
  if (alpha < 0.0 || beta < 0.0) throw ConfigError("loss weights must be non-negative");
  if (alpha == 0.0 && beta == 0.0) throw ConfigError("alpha = beta = 0 gives no learning signal");
  return alpha * phi + beta * lambda;
}

double cosine_distance(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw Error("cosine_distance: dimension mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw Error("cosine distance of a zero vector");
  return 1.0 - a.dot(b) / (na * nb);
}

namespace {

// Distances closer than this are tied, so rounding never overrides the
// lowest-index rule.
constexpr double kTieTolerance = 1e-12;

int hardest_negative(const Matrix& x, const Vector& norms, std::span<const int> word_ids, int i) {
  int neg = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < static_cast<int>(x.rows()); ++j) {
    if (word_ids[j] == word_ids[i]) continue;
    const double d = 1.0 - x.row(i).dot(x.row(j)) / (norms(i) * norms(j));
    if (neg < 0 || d < best - kTieTolerance) {
      best = d;
      neg = j;
    }
  }
  return neg;
}

}  // namespace

std::vector<int> mine_hard_negatives(const Matrix& embeddings, std::span<const int> word_ids) {
  const auto n = embeddings.rows();
  if (static_cast<Eigen::Index>(word_ids.size()) != n) {
    throw Error("mine_hard_negatives: label count mismatch");
  }
  Vector norms = embeddings.rowwise().norm();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (norms(i) == 0.0) throw Error("cosine distance of a zero vector");
  }
  std::vector<int> out(static_cast<size_t>(n), -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = hardest_negative(embeddings, norms, word_ids, static_cast<int>(i));
    if (out[i] < 0) throw Error("mine_hard_negatives: batch holds a single word type");
  }
  return out;
}

std::vector<int> first_positives(std::span<const int> word_ids) {
  std::vector<int> out(word_ids.size(), -1);
  for (size_t i = 0; i < word_ids.size(); ++i) {
    for (size_t j = 0; j < word_ids.size(); ++j) {
      if (j != i && word_ids[j] == word_ids[i]) {
        out[i] = static_cast<int>(j);
        break;
      }
    }
  }
  return out;
}

double triplet_hinge(double d_ap, double d_an, double margin) {
  return std::max(0.0, margin + d_ap - d_an);
}

double triplet_loss(const Vector& anchor, const Vector& positive, const Vector& negative,
                    double margin) {
  return triplet_hinge(cosine_distance(anchor, positive), cosine_distance(anchor, negative),
                       margin);
}

nn::Var phonological_loss(std::span<const nn::Var> logits, const Eigen::MatrixXi& targets,
                          int pad) {
  if (logits.empty()) throw Error("phonological_loss: no decoder steps");
  if (targets.cols() > static_cast<Eigen::Index>(logits.size())) {
    throw Error("phonological_loss: fewer decoder steps than targets");
  }
  const Eigen::Index batch = targets.rows();
  for (Eigen::Index i = 0; i < batch; ++i) {
    bool any = false;
    for (Eigen::Index t = 0; t < targets.cols(); ++t) any = any || targets(i, t) != pad;
    if (!any) throw Error("phonological_loss: target holds only padding");
  }
  nn::Var total;
  for (Eigen::Index t = 0; t < targets.cols(); ++t) {
    std::vector<int> step(static_cast<size_t>(batch));
    for (Eigen::Index i = 0; i < batch; ++i) step[i] = targets(i, t) == pad ? -1 : targets(i, t);
    nn::Var term = nn::softmax_cross_entropy(logits[t], step);
    total = total.valid() ? nn::add(total, term) : term;
  }
  return total;
}

nn::Var semantic_loss(nn::Var v, nn::Var targets) {
  return nn::row_l2_distance(v, targets, kSemanticEps);
}

TripletTerms triplet_terms(nn::Var embeddings, std::span<const int> word_ids, double margin) {
  const Matrix& x = embeddings.value();
  const auto n = static_cast<int>(x.rows());
  std::vector<int> positives = first_positives(word_ids);
  Vector norms = x.rowwise().norm();

  TripletTerms terms;
  for (int i = 0; i < n; ++i) {
    if (positives[i] < 0) continue;
    const int neg = hardest_negative(x, norms, word_ids, i);
    if (neg < 0) continue;
    terms.anchors.push_back(i);
    terms.positives.push_back(positives[i]);
    terms.negatives.push_back(neg);
  }
  if (terms.anchors.empty()) return terms;

  nn::Var a = nn::gather_rows(embeddings, terms.anchors);
  nn::Var p = nn::gather_rows(embeddings, terms.positives);
  nn::Var q = nn::gather_rows(embeddings, terms.negatives);
  nn::Tape& tape = *embeddings.tape();
  nn::Var m = tape.constant(Matrix::Constant(static_cast<Eigen::Index>(terms.anchors.size()), 1,
                                             margin));
  nn::Var gap = nn::sub(nn::add(m, nn::row_cosine_distance(a, p)), nn::row_cosine_distance(a, q));
  terms.per_anchor = nn::relu(gap);
  return terms;
}

}  // namespace awe::losses
