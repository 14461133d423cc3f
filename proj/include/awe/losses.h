// awe/losses.h

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

// Training objectives: phone-sequence cross-entropy, semantic regression
// (plain, non-squared L2), their weighted sum, and the cosine triplet hinge
// with in-batch hardest negatives.
//
// Scalar functions work on plain values; the graph variants build the same
// quantities on an nn::Tape and return per-segment B×1 columns so batch means
// are taken by the caller.

#ifndef AWE_LOSSES_H_
#define AWE_LOSSES_H_

#include <span>
#include <vector>

#include "awe/nncore.h"

namespace awe::losses {

inline constexpr double kSemanticEps = 1e-12;
inline constexpr double kDefaultMargin = 0.4;

struct LossBreakdown {
  double phi = 0.0;
  double lambda = 0.0;
  double triplet = 0.0;
  double total = 0.0;
  size_t segments = 0;
  size_t anchors = 0;  // anchors that contributed to the triplet term
};

/// −Σ_t log softmax(logits_t)[target_t] over the rows of logits; rows whose
/// target equals pad are skipped. Throws when no target is a real symbol.
double phonological_loss(const Matrix& logits, std::span<const int> targets, int pad);

/// ‖v − target‖₂ (not squared).
double semantic_loss(const Vector& v, const Vector& target);

/// α·phi + β·lambda. Throws ConfigError for negative weights or α = β = 0.
double joint_loss(double phi, double lambda, double alpha, double beta);

/// 1 − a·b / (‖a‖‖b‖), in [0, 2]. Throws on zero vectors.
double cosine_distance(const Vector& a, const Vector& b);

/// For each row i, argmin over rows j with a different word of d(x_i, x_j);
/// ties (within 1e-12) go to the lowest j. Throws when some anchor has no
/// eligible row.
std::vector<int> mine_hard_negatives(const Matrix& embeddings, std::span<const int> word_ids);

/// First row j ≠ i sharing row i's word, or −1.
std::vector<int> first_positives(std::span<const int> word_ids);

/// max(0, m + d_ap − d_an).
double triplet_hinge(double d_ap, double d_an, double margin = kDefaultMargin);
double triplet_loss(const Vector& anchor, const Vector& positive, const Vector& negative,
                    double margin = kDefaultMargin);

// Graph versions.

/// Per-segment phone loss, B×1. logits[t] is B×V; targets is B×S with
/// S ≤ logits.size(); pad entries are ignored.
nn::Var phonological_loss(std::span<const nn::Var> logits, const Eigen::MatrixXi& targets,
                          int pad);

/// Per-segment ‖v_i − t_i‖ with sqrt(· + kSemanticEps), B×1.
nn::Var semantic_loss(nn::Var v, nn::Var targets);

struct TripletTerms {
  nn::Var per_anchor;          // A×1 hinge values, A = number of usable anchors
  std::vector<int> anchors;
  std::vector<int> positives;
  std::vector<int> negatives;
};

/// Triplet hinge for every row that has both a same-word and a different-word
/// row in the batch. Negatives are mined on the current embedding values.
/// per_anchor is invalid when no row qualifies.
TripletTerms triplet_terms(nn::Var embeddings, std::span<const int> word_ids, double margin);

}  // namespace awe::losses

#endif  // AWE_LOSSES_H_
