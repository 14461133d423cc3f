// awe/evaluation.h

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

// Same-different word discrimination.
//
// All n(n−1)/2 unordered pairs are ranked by ascending cosine distance, ties
// broken by (i, j) in lexicographic order. Same-word pairs are relevant and
// the score is the average precision of that single pooled ranking.

#ifndef AWE_EVALUATION_H_
#define AWE_EVALUATION_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "awe/corpus.h"
#include "awe/model.h"
#include "json.hpp"

namespace awe::eval {

struct EmbeddingSet {
  Matrix vectors;  // n × D
  std::vector<std::string> segment_ids;
  std::vector<std::string> words;
  std::vector<std::string> speakers;

  size_t size() const { return words.size(); }
  /// Throws Error when labels and rows disagree, n < 2 or a row is zero.
  void validate() const;
};

/// (1/P) Σ_{k : rel_k = 1} precision@k. Throws when nothing is relevant.
double average_precision(std::span<const int> ranked_relevance);

struct MapResult {
  std::string split;
  size_t n = 0;
  size_t n_positive_pairs = 0;
  double map = 0.0;

  nlohmann::json to_json() const;
};

/// Throws when no same-word pair exists.
MapResult same_different_map(const EmbeddingSet& set);

/// TSV rows: segment_id word speaker v_1 ... v_D, values at 9 significant digits.
void export_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);
EmbeddingSet import_embeddings(const std::filesystem::path& path);

/// Mean over segments of the fraction of its k nearest cosine neighbours
/// (ties to lower index) that share its word. Requires 1 ≤ k < n.
double neighbor_purity(const EmbeddingSet& set, int k);

/// Embeds every record of a split with the model in evaluation mode.
EmbeddingSet embed_split(model::AweModel& model, const corpus::Corpus& corpus,
                         corpus::Split split, size_t batch_size = 128);

}  // namespace awe::eval

#endif  // AWE_EVALUATION_H_
