// awe/model.cc

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

#include "awe/model.h"

#include <algorithm>
#include <cmath>

namespace awe::model {

void ModelConfig::validate() const {
  if (feature_dim <= 0 || conv_filters <= 0 || kernel <= 0 || stride <= 0 || gru_layers <= 0 ||
      hidden <= 0 || semantic_dim <= 0) {
    throw ConfigError("model: sizes must be positive");
  }
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("model: dropout must lie in [0, 1)");
  if (decoder_layers != 1) throw ConfigError("model: only a 1-layer decoder is supported");
  if (phone_inventory_size <= 0) throw ConfigError("model: phone inventory is empty");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"feature_dim", feature_dim},   {"conv_filters", conv_filters},
          {"kernel", kernel},             {"stride", stride},
          {"gru_layers", gru_layers},     {"hidden", hidden},
          {"dropout", dropout},           {"decoder_layers", decoder_layers},
          {"semantic_dim", semantic_dim}, {"phone_inventory_size", phone_inventory_size}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.feature_dim = j.at("feature_dim").get<int>();
  c.conv_filters = j.at("conv_filters").get<int>();
  c.kernel = j.at("kernel").get<int>();
  c.stride = j.at("stride").get<int>();
  c.gru_layers = j.at("gru_layers").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.decoder_layers = j.at("decoder_layers").get<int>();
  c.semantic_dim = j.at("semantic_dim").get<int>();
  c.phone_inventory_size = j.at("phone_inventory_size").get<int>();
  return c;
}

size_t expected_parameter_count(const ModelConfig& c) {
  const size_t h = c.hidden;
  const size_t f = c.conv_filters;
  const size_t v = c.output_classes();
  size_t n = static_cast<size_t>(c.feature_dim) * c.kernel * f + f;
  for (int l = 0; l < c.gru_layers; ++l) {
    const size_t in = l == 0 ? f : h;
    n += in * 3 * h + h * 3 * h + 6 * h;
  }
  n += v * h + h;                  // phone embedding + start vector
  n += 6 * h * h + 6 * h;          // decoder GRU
  n += h * v + v;                  // decoder output layer
  n += h * c.semantic_dim + c.semantic_dim;  // regressor
  return n;
}

AweModel::AweModel(const ModelConfig& cfg, uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  nn::RngState rng(seed);
  conv_ = nn::make_conv1d("encoder.conv", cfg_.feature_dim, cfg_.conv_filters, cfg_.kernel,
                          cfg_.stride, rng);
  for (int l = 0; l < cfg_.gru_layers; ++l) {
    const int in = l == 0 ? cfg_.conv_filters : cfg_.hidden;
    encoder_gru_.push_back(nn::make_gru("encoder.gru" + std::to_string(l), in, cfg_.hidden, rng));
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(cfg_.hidden));
  Matrix emb(cfg_.output_classes(), cfg_.hidden);
  for (Eigen::Index i = 0; i < emb.size(); ++i) emb.data()[i] = rng.uniform(-bound, bound);
  phone_embedding_ = nn::ParamTensor("decoder.phone_embedding", std::move(emb));
  Matrix start(1, cfg_.hidden);
  for (Eigen::Index i = 0; i < start.size(); ++i) start.data()[i] = rng.uniform(-bound, bound);
  start_ = nn::ParamTensor("decoder.start", std::move(start));
  decoder_gru_ = nn::make_gru("decoder.gru", cfg_.hidden, cfg_.hidden, rng);
  decoder_out_ = nn::make_linear("decoder.out", cfg_.hidden, cfg_.output_classes(), rng);
  regressor_ = nn::make_linear("regressor", cfg_.hidden, cfg_.semantic_dim, rng);
}

std::vector<nn::ParamTensor*> AweModel::encoder_parameters() {
  std::vector<nn::ParamTensor*> out{&conv_.weight, &conv_.bias};
  for (auto& g : encoder_gru_) {
    out.insert(out.end(), {&g.w_ih, &g.w_hh, &g.b_ih, &g.b_hh});
  }
  return out;
}

std::vector<nn::ParamTensor*> AweModel::decoder_parameters() {
  return {&phone_embedding_, &start_,           &decoder_gru_.w_ih,   &decoder_gru_.w_hh,
          &decoder_gru_.b_ih, &decoder_gru_.b_hh, &decoder_out_.weight, &decoder_out_.bias};
}

std::vector<nn::ParamTensor*> AweModel::regressor_parameters() {
  return {&regressor_.weight, &regressor_.bias};
}

std::vector<nn::ParamTensor*> AweModel::parameters() {
  auto out = encoder_parameters();
  for (auto* p : decoder_parameters()) out.push_back(p);
  for (auto* p : regressor_parameters()) out.push_back(p);
  return out;
}

nn::Var AweModel::encode(nn::Tape& tape, std::span<const Matrix> frames,
                         const std::vector<int>& lengths, bool training, nn::RngState& rng) {
  if (frames.empty()) throw Error("encode: empty batch");
  std::vector<nn::Var> inputs;
  inputs.reserve(frames.size());
  for (const Matrix& f : frames) {
    if (f.cols() != cfg_.feature_dim) throw Error("encode: feature dimension mismatch");
    inputs.push_back(tape.constant(f));
  }
  std::vector<int> conv_lengths;
  conv_lengths.reserve(lengths.size());
  for (int len : lengths) {
    if (len < cfg_.kernel) throw Error("segment too short for front-end");
    conv_lengths.push_back(nn::conv1d_output_length(len, cfg_.kernel, cfg_.stride));
  }
  std::vector<nn::Var> conv_out = nn::conv1d(tape, conv_, inputs);
  return nn::gru_stack(tape, encoder_gru_, conv_out, conv_lengths, cfg_.dropout, training, rng);
}

std::vector<nn::Var> AweModel::decode(nn::Tape& tape, nn::Var x, int steps) {
  if (steps < 1) throw ConfigError("decode: max_len must be >= 1");
  const auto batch = static_cast<int>(x.rows());
  nn::Var table = tape.param(phone_embedding_);
  nn::Var input = nn::gather_rows(tape.param(start_), std::vector<int>(batch, 0));
  nn::Var h = x;
  std::vector<nn::Var> logits;
  logits.reserve(steps);
  for (int t = 0; t < steps; ++t) {
    h = nn::gru_step(tape, decoder_gru_, input, h);
    nn::Var out = nn::linear(tape, decoder_out_, h);
    logits.push_back(out);
    if (t + 1 == steps) break;
    std::vector<int> next(batch);
    for (int i = 0; i < batch; ++i) {
      Eigen::Index best = 0;
      out.value().row(i).maxCoeff(&best);
      next[i] = static_cast<int>(best);
    }
    input = nn::gather_rows(table, std::move(next));
  }
  return logits;
}

nn::Var AweModel::regress(nn::Tape& tape, nn::Var x) {
  return nn::tanh(nn::linear(tape, regressor_, x));
}

std::vector<Matrix> pad_time_major(std::span<const Matrix* const> segments,
                                   std::vector<int>* lengths) {
  if (segments.empty()) throw Error("pad_time_major: no segments");
  Eigen::Index longest = 0;
  for (const Matrix* m : segments) longest = std::max(longest, m->rows());
  const auto b = static_cast<Eigen::Index>(segments.size());
  const Eigen::Index dim = segments[0]->cols();
  std::vector<Matrix> frames(static_cast<size_t>(longest), Matrix::Zero(b, dim));
  lengths->clear();
  for (Eigen::Index i = 0; i < b; ++i) {
    const Matrix& m = *segments[i];
    for (Eigen::Index t = 0; t < m.rows(); ++t) frames[t].row(i) = m.row(t);
    lengths->push_back(static_cast<int>(m.rows()));
  }
  return frames;
}

Vector AweModel::embed(const Matrix& features) {
  const Matrix* one[] = {&features};
  return embed_many(one, 1).row(0).transpose();
}

Matrix AweModel::embed_many(std::span<const Matrix* const> segments, size_t batch_size) {
  Matrix out(static_cast<Eigen::Index>(segments.size()), cfg_.hidden);
  for (size_t start = 0; start < segments.size(); start += batch_size) {
    const size_t n = std::min(batch_size, segments.size() - start);
    std::vector<int> lengths;
    auto frames = pad_time_major(segments.subspan(start, n), &lengths);
    nn::Tape tape;
    nn::Var x = encode(tape, frames, lengths, false, eval_rng_);
    out.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(n)) = x.value();
  }
  return out;
}

std::vector<RowVector> AweModel::decode_phones(const Vector& x, int max_len) {
  if (max_len < 1) throw ConfigError("decode_phones: max_len must be >= 1");
  if (x.size() != cfg_.hidden) throw Error("decode_phones: embedding size mismatch");
  nn::Tape tape;
  nn::Var table = tape.constant(phone_embedding_.value);
  nn::Var input = tape.constant(start_.value);
  nn::Var h = tape.constant(x.transpose());
  std::vector<RowVector> out;
  for (int t = 0; t < max_len; ++t) {
    h = nn::gru_step(tape, decoder_gru_, input, h);
    nn::Var logits = nn::linear(tape, decoder_out_, h);
    out.push_back(logits.value().row(0));
    Eigen::Index best = 0;
    logits.value().row(0).maxCoeff(&best);
    if (static_cast<int>(best) == cfg_.eos()) break;
    input = nn::gather_rows(table, {static_cast<int>(best)});
  }
  return out;
}

std::vector<int> AweModel::greedy_phones(const Vector& x, int max_len) {
  std::vector<int> ids;
  for (const RowVector& row : decode_phones(x, max_len)) {
    Eigen::Index best = 0;
    row.maxCoeff(&best);
    ids.push_back(static_cast<int>(best));
  }
  return ids;
}

Vector AweModel::regress_semantic(const Vector& x) {
  nn::Tape tape;
  return regress(tape, tape.constant(x.transpose())).value().row(0).transpose();
}

}  // namespace awe::model
