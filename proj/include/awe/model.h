// awe/model.h

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

// Acoustic encoder, phonological decoder and semantic regressor.
//
//   encoder    conv1d(39 → filters, kernel, stride) → stacked GRU; the AWE is
//              the top layer's last hidden state.
//   decoder    1-layer GRU started from the AWE. Step 0 reads a learned start
//              vector; step t reads the embedding of step t−1's argmax
//              output. Outputs cover phones + EOS.
//   regressor  tanh(linear(hidden → K)).

#ifndef AWE_MODEL_H_
#define AWE_MODEL_H_

#include <cstdint>
#include <span>
#include <vector>

#include "awe/corpus.h"
#include "awe/nncore.h"
#include "json.hpp"

namespace awe::model {

struct ModelConfig {
  int feature_dim = 39;
  int conv_filters = 64;
  int kernel = 5;
  int stride = 2;
  int gru_layers = 3;
  int hidden = 512;  // also the embedding size D
  double dropout = 0.2;
  int decoder_layers = 1;
  int semantic_dim = 300;
  int phone_inventory_size = 0;  // phones only; the decoder adds EOS

  void validate() const;
  int embedding_dim() const { return hidden; }
  int output_classes() const { return phone_inventory_size + 1; }
  int eos() const { return phone_inventory_size; }
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  bool operator==(const ModelConfig&) const = default;
};

/// Parameter count implied by the configuration.
size_t expected_parameter_count(const ModelConfig& cfg);

class AweModel {
 public:
  AweModel(const ModelConfig& cfg, uint64_t seed);
  AweModel(const AweModel&) = delete;
  AweModel& operator=(const AweModel&) = delete;
  AweModel(AweModel&&) = default;

  const ModelConfig& config() const { return cfg_; }

  std::vector<nn::ParamTensor*> parameters();
  std::vector<nn::ParamTensor*> encoder_parameters();
  std::vector<nn::ParamTensor*> decoder_parameters();
  std::vector<nn::ParamTensor*> regressor_parameters();

  /// B × D embeddings for a time-major padded batch. Throws when a segment is
  /// shorter than the convolution kernel.
  nn::Var encode(nn::Tape& tape, std::span<const Matrix> frames, const std::vector<int>& lengths,
                 bool training, nn::RngState& rng);
  /// Free-running decoder logits, one B × (P + 1) var per step.
  std::vector<nn::Var> decode(nn::Tape& tape, nn::Var x, int steps);
  /// tanh(x·W + b), B × K.
  nn::Var regress(nn::Tape& tape, nn::Var x);

  // Evaluation-mode helpers (no dropout, no gradients).

  Vector embed(const Matrix& features);
  /// Embeddings of many segments, padded in batches of batch_size.
  Matrix embed_many(std::span<const Matrix* const> segments, size_t batch_size = 128);
  /// Greedy decode: stops after EOS or max_len steps. Returns one logit row
  /// per emitted step.
  std::vector<RowVector> decode_phones(const Vector& x, int max_len);
  /// Argmax phone ids from decode_phones.
  std::vector<int> greedy_phones(const Vector& x, int max_len);
  Vector regress_semantic(const Vector& x);

 private:
  ModelConfig cfg_;
  nn::Conv1dParams conv_;
  std::vector<nn::GruParams> encoder_gru_;
  nn::ParamTensor phone_embedding_;  // (P + 1) × H
  nn::ParamTensor start_;            // 1 × H
  nn::GruParams decoder_gru_;
  nn::LinearParams decoder_out_;
  nn::LinearParams regressor_;
  nn::RngState eval_rng_{0};
};

/// Builds time-major padded frames for a list of segments.
std::vector<Matrix> pad_time_major(std::span<const Matrix* const> segments,
                                   std::vector<int>* lengths);

}  // namespace awe::model

#endif  // AWE_MODEL_H_
