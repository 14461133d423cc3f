// awe/corpus.h

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

// Spoken-word dataset: segment manifest, phonetic lexicon, semantic lexicon,
// speaker-disjoint splits and padded mini-batches.
//
// File formats (UTF-8):
//   manifest.tsv  segment_id<TAB>word<TAB>speaker<TAB>split<TAB>feature_path
//                 or ... split<TAB>wav_path<TAB>start_s<TAB>end_s
//                 Relative paths resolve against the manifest's directory.
//   lexicon.txt   word<TAB>phone phone phone ...
//   semantic.txt  "vocab_size dim" header, then "word v1 ... vK" per line.

#ifndef AWE_CORPUS_H_
#define AWE_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "awe/features.h"
#include "json.hpp"

namespace awe::corpus {

enum class Split { kTrain = 0, kValid = 1, kTest = 2 };

std::string split_name(Split s);
/// Accepts train/valid/test (also "dev", "validation"). Throws ConfigError.
Split parse_split(const std::string& s);

/// Phonetic lexicon. Phones are indexed 0..P−1 in sorted order; EOS = P and
/// PAD = P + 1 never occur inside a transcription.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::map<std::string, std::vector<std::string>> entries);

  static Lexicon load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  bool contains(const std::string& word) const { return ids_.contains(word); }
  /// Phone indices of a word (no EOS). Throws on unknown words.
  const std::vector<int>& phones(const std::string& word) const;
  const std::vector<std::string>& inventory() const { return inventory_; }
  int phone_count() const { return static_cast<int>(inventory_.size()); }
  int eos() const { return phone_count(); }
  int pad() const { return phone_count() + 1; }
  /// Decoder output classes: phones plus EOS.
  int output_size() const { return phone_count() + 1; }
  size_t size() const { return ids_.size(); }
  std::vector<std::string> phone_names(std::span<const int> ids) const;

 private:
  std::vector<std::string> inventory_;
  std::map<std::string, std::vector<int>> ids_;
};

class SemanticLexicon {
 public:
  SemanticLexicon() = default;
  SemanticLexicon(int dim, std::map<std::string, Vector> vectors);

  /// Throws Error when rows disagree on dimension or hold non-finite values.
  static SemanticLexicon load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  bool contains(const std::string& word) const { return vectors_.contains(word); }
  const Vector& vector(const std::string& word) const;
  int dim() const { return dim_; }
  size_t size() const { return vectors_.size(); }

 private:
  int dim_ = 0;
  std::map<std::string, Vector> vectors_;
};

/// Per-dimension affine map of semantic targets into [−0.9, 0.9] over a
/// fitted vocabulary. Constant dimensions map to 0.
struct SemanticScaler {
  Vector minimum;
  Vector range;
  double bound = 0.9;

  static SemanticScaler fit(std::span<const Vector* const> targets, double bound = 0.9);
  static SemanticScaler identity(int dim);
  Vector apply(const Vector& v) const;
  bool is_identity() const { return minimum.size() == 0; }
  nlohmann::json to_json() const;
  static SemanticScaler from_json(const nlohmann::json& j);
};

struct SegmentRecord {
  std::string segment_id;
  std::string word;
  std::string speaker;
  Split split = Split::kTrain;
  features::FeatureMatrix features;
  int word_id = -1;
  int speaker_id = -1;
};

struct CorpusOptions {
  /// Training-split mean/variance normalisation, applied to every split.
  bool normalize_features = true;
  /// Use these statistics instead of fitting them (e.g. from a checkpoint).
  std::optional<features::NormStats> norm_stats;
  bool scale_semantic_targets = true;
  std::optional<SemanticScaler> scaler;
  /// Used for manifests that reference wav files.
  features::FeatureConfig feature_config;
};

class Corpus {
 public:
  const std::vector<SegmentRecord>& records() const { return records_; }
  const Lexicon& lexicon() const { return lexicon_; }
  const SemanticLexicon& semantics() const { return semantics_; }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::string>& speakers() const { return speakers_; }
  /// Scaled semantic target of a word id.
  const Vector& semantic_target(int word_id) const { return targets_[word_id]; }
  const features::NormStats& norm_stats() const { return norm_; }
  const SemanticScaler& scaler() const { return scaler_; }
  size_t skipped() const { return skip_reasons_.size(); }
  const std::vector<std::string>& skip_reasons() const { return skip_reasons_; }
  std::vector<size_t> split_indices(Split split) const;

  friend Corpus load_corpus(const std::filesystem::path&, const std::filesystem::path&,
                            const std::filesystem::path&, const CorpusOptions&);

 private:
  std::vector<SegmentRecord> records_;
  Lexicon lexicon_;
  SemanticLexicon semantics_;
  std::vector<std::string> words_;
  std::vector<std::string> speakers_;
  std::vector<Vector> targets_;
  features::NormStats norm_;
  SemanticScaler scaler_;
  std::vector<std::string> skip_reasons_;
};

/// Resolves every manifest record against both lexicons. Records whose word
/// is missing from either lexicon are dropped with a warning and counted.
Corpus load_corpus(const std::filesystem::path& manifest, const std::filesystem::path& lexicon,
                   const std::filesystem::path& semantic, const CorpusOptions& options = {});
/// manifest.tsv, lexicon.txt and semantic.txt inside dir.
Corpus load_corpus_dir(const std::filesystem::path& dir, const CorpusOptions& options = {});

/// Distinct word types ÷ segments. Throws on an empty split.
double type_token_ratio(const Corpus& corpus, Split split);
double type_token_ratio(std::span<const std::string> words);

struct SplitStats {
  size_t segments = 0;
  size_t types = 0;
  size_t speakers = 0;
  double duration_mean = 0.0;  // seconds
  double duration_sd = 0.0;
  double ttr = 0.0;
};

/// Durations are derived from frame counts: (T − 1)·hop + frame.
SplitStats split_stats(const Corpus& corpus, Split split, double frame_ms = 25.0,
                       double hop_ms = 10.0);
bool speakers_disjoint(const Corpus& corpus);

/// Groups positions 0..n−1 into batches. Plain mode shuffles and chunks.
/// With require_positive_pairs, each word's exemplars are split into chunks
/// of two (three for an odd remainder) that are kept together, so every
/// anchor from a non-singleton type sees a same-word segment in its batch.
/// Singleton types are carried along as negatives only.
std::vector<std::vector<size_t>> plan_batches(std::span<const int> word_labels,
                                              size_t batch_size, uint64_t seed,
                                              bool require_positive_pairs);

/// Batches of record indices covering a split once.
std::vector<std::vector<size_t>> make_batches(const Corpus& corpus, Split split,
                                              size_t batch_size, uint64_t seed,
                                              bool require_positive_pairs);

struct Batch {
  /// Time-major, zero padded: frames[t] is B × 39.
  std::vector<Matrix> frames;
  std::vector<int> feature_lengths;
  /// B × (τ_max + 1): φ_1..φ_τ, EOS, then PAD.
  Eigen::MatrixXi phone_targets;
  /// τ + 1 per row (EOS included).
  std::vector<int> phone_lengths;
  Matrix semantic_targets;  // B × K
  std::vector<int> word_ids;
  std::vector<int> speaker_ids;
  std::vector<size_t> record_indices;
  int eos = 0;
  int pad = 0;

  size_t size() const { return feature_lengths.size(); }
  int decode_steps() const { return static_cast<int>(phone_targets.cols()); }
};

Batch assemble_batch(const Corpus& corpus, std::span<const size_t> record_indices);

}  // namespace awe::corpus

#endif  // AWE_CORPUS_H_
