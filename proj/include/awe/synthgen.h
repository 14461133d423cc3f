// awe/synthgen.h

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

// Synthetic spoken-word corpus. Each phone owns a fixed 13-dim prototype; an
// exemplar repeats the prototypes of its word for random durations, adds a
// per-speaker shift and i.i.d. noise, and gets Δ/ΔΔ columns from
// features::append_deltas. Semantic vectors are cluster centres plus jitter;
// "variant" words share a stem with an earlier word and its cluster.

#ifndef AWE_SYNTHGEN_H_
#define AWE_SYNTHGEN_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "awe/corpus.h"
#include "awe/features.h"

namespace awe::synth {

struct SynthConfig {
  int n_word_types = 30;
  int min_phones = 3;
  int max_phones = 6;
  int n_phones = 20;
  int n_speakers = 8;
  int n_valid_speakers = 1;
  int n_test_speakers = 2;
  int exemplars_per_speaker_per_word = 6;
  int min_frames_per_phone = 2;
  int max_frames_per_phone = 5;
  int feature_dim = 39;
  double prototype_scale = 1.0;
  double speaker_shift_scale = 0.5;
  double noise_scale = 0.7;
  int semantic_cluster_count = 6;
  double semantic_jitter = 0.2;
  double lemma_variant_rate = 0.3;
  int semantic_dim = 300;
  uint64_t seed = 1;
  /// Phone strings imposed on the first words, in order. Duplicates allowed.
  std::vector<std::vector<int>> forced_phone_strings;

  /// Throws ConfigError on non-positive counts or impossible ranges.
  void validate() const;
  int static_dim() const { return feature_dim / 3; }
};

struct SynthSegment {
  std::string segment_id;
  std::string word;
  std::string speaker;
  corpus::Split split = corpus::Split::kTrain;
  std::vector<int> durations;  // frames per phone
  features::FeatureMatrix features;
};

struct SynthCorpus {
  std::vector<std::string> phone_names;
  Matrix prototypes;                             // n_phones × static_dim
  std::map<std::string, std::vector<int>> words;  // word → phone ids
  std::map<std::string, int> semantic_cluster;
  std::map<std::string, Vector> semantic;
  std::map<std::string, RowVector> speaker_shift;
  std::vector<SynthSegment> segments;
};

SynthCorpus generate_corpus(const SynthConfig& cfg);

/// Static (pre-delta) frames of one exemplar.
Matrix render_static(const Matrix& prototypes, const std::vector<int>& phones,
                     const std::vector<int>& durations, const RowVector& speaker_shift,
                     double noise_scale, std::mt19937_64& rng);

/// Writes manifest.tsv, lexicon.txt, semantic.txt and feats/<id>.feat.
void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);

}  // namespace awe::synth

#endif  // AWE_SYNTHGEN_H_
