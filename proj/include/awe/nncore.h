// awe/nncore.h

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

// Reverse-mode differentiation over dense matrices.
//
// A Tape records every operation of one forward pass. Values are batch-major
// matrices (rows = batch entries). Every op in this file is row-independent:
// row i of an output depends only on row i of its inputs, except matmul's
// right operand and parameter broadcasts. Padded batches therefore never leak
// across rows.

#ifndef AWE_NNCORE_H_
#define AWE_NNCORE_H_

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "awe/common.h"

namespace awe::nn {

/// Named trainable tensor. Vectors are stored as 1×n matrices.
struct ParamTensor {
  ParamTensor() = default;
  ParamTensor(std::string name, Matrix value);

  std::string name;
  Matrix value;
  Matrix grad;

  Eigen::Index size() const { return value.size(); }
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

/// Seeded generator used for initialisation and dropout masks.
class RngState {
 public:
  explicit RngState(uint64_t seed = 0) : engine_(seed) {}

  double uniform(double lo, double hi);
  double normal(double mean, double stddev);
  bool bernoulli(double p);
  uint64_t next_u64() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

class Tape;

/// Handle to a node on a Tape. Cheap to copy; only valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const;
  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  /// Called during backward with the tape and the node's own id. The node's
  /// gradient is available through grad(self); inputs are accumulated via
  /// accumulate().
  using BackwardFn = std::function<void(Tape&, int self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var param(ParamTensor& p);

  /// Records an op output. The backward function is dropped when no input
  /// requires a gradient.
  Var record(Matrix value, std::initializer_list<Var> inputs, BackwardFn fn);
  Var record(Matrix value, std::span<const Var> inputs, BackwardFn fn);

  /// Seeds d(loss)/d(loss) = 1 and propagates to every parameter leaf,
  /// accumulating into ParamTensor::grad. Throws if loss is not a finite
  /// 1×1 value.
  void backward(Var loss);

  const Matrix& value(int id) const { return nodes_[id].value; }
  const Matrix& grad(int id) const { return nodes_[id].grad; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  template <typename Derived>
  void accumulate(Var v, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[v.id()];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) n.grad.setZero(n.value.rows(), n.value.cols());
    n.grad += g;
  }
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    BackwardFn backward;
    ParamTensor* param = nullptr;
  };
  std::vector<Node> nodes_;
};

// Elementwise and linear ops.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var matmul(Var a, Var b);
/// a (B×n) + bias (1×n) broadcast over rows.
Var add_bias(Var a, Var bias);
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
/// Sum of all entries, 1×1.
Var sum(Var a);
/// Mean of all entries, 1×1.
Var mean(Var a);
/// Horizontal concatenation of equally tall blocks.
Var concat_cols(std::span<const Var> parts);
/// Rows of table selected by index (embedding lookup, broadcast of a 1×n row).
Var gather_rows(Var table, std::vector<int> index);
/// Row i is from `take` when keep[i] else from `fallback`.
Var blend_rows(const std::vector<bool>& keep, Var take, Var fallback);
/// Inverted dropout. Identity when !training or p == 0.
Var dropout(Var a, double p, bool training, RngState& rng);

/// Fused GRU cell. gi = x·W_ih + b_ih and gh = h·W_hh + b_hh are B×3H laid
/// out as [reset | update | candidate]:
///   r = σ(gi_r + gh_r), z = σ(gi_z + gh_z), n = tanh(gi_n + r ⊙ gh_n),
///   h' = (1 − z) ⊙ n + z ⊙ h.
Var gru_cell(Var gi, Var gh, Var h_prev);

/// Per-row cross-entropy −log softmax(logits)[target]. target < 0 marks an
/// ignored row (loss 0, no gradient). Returns B×1.
Var softmax_cross_entropy(Var logits, const std::vector<int>& targets);
/// Per-row sqrt(‖a − b‖² + eps), B×1.
Var row_l2_distance(Var a, Var b, double eps);
/// Per-row 1 − cos(a, b), B×1. Throws on zero rows.
Var row_cosine_distance(Var a, Var b);

// Layers.

struct LinearParams {
  ParamTensor weight;  // in × out
  ParamTensor bias;    // 1 × out
};

struct Conv1dParams {
  ParamTensor weight;  // (kernel·C_in) × C_out, row k·C_in + c
  ParamTensor bias;    // 1 × C_out
  int kernel = 5;
  int stride = 2;
  int in_channels = 0;
};

struct GruParams {
  ParamTensor w_ih;  // in × 3H
  ParamTensor w_hh;  // H × 3H
  ParamTensor b_ih;  // 1 × 3H
  ParamTensor b_hh;  // 1 × 3H
  int hidden = 0;
};

/// uniform(−1/√fan_in, 1/√fan_in) initialisation.
LinearParams make_linear(const std::string& name, int in, int out, RngState& rng);
Conv1dParams make_conv1d(const std::string& name, int in_channels, int out_channels,
                         int kernel, int stride, RngState& rng);
GruParams make_gru(const std::string& name, int in, int hidden, RngState& rng);

Var linear(Tape& tape, LinearParams& p, Var x);

/// Output length of a valid (unpadded) 1-D convolution.
int conv1d_output_length(int frames, int kernel, int stride);

/// Convolution over a time-major sequence of B×C_in frames. Produces
/// floor((T − kernel)/stride) + 1 steps of B×C_out. Throws when T < kernel.
std::vector<Var> conv1d(Tape& tape, Conv1dParams& p, std::span<const Var> frames);

/// One GRU step for a batch: x is B×in, h_prev is B×H.
Var gru_step(Tape& tape, GruParams& p, Var x, Var h_prev);

/// Runs stacked GRU layers over a time-major sequence from zero initial
/// states. Row i only advances while step < lengths[i]. Dropout is applied to
/// the outputs of every layer except the top one. Returns the top layer's
/// final hidden state, B×H.
Var gru_stack(Tape& tape, std::span<GruParams> layers, std::span<const Var> steps,
              const std::vector<int>& lengths, double dropout_p, bool training,
              RngState& rng);

// Parameter utilities.

void zero_grads(std::span<ParamTensor* const> params);
double global_grad_norm(std::span<ParamTensor* const> params);
/// Scales all gradients so the global norm is at most max_norm. Returns the
/// norm before clipping.
double clip_grad_norm(std::span<ParamTensor* const> params, double max_norm);
bool all_finite(std::span<ParamTensor* const> params);
size_t count_parameters(std::span<ParamTensor* const> params);

struct GradCheckReport {
  size_t sampled = 0;
  /// Max |a − n| / max(|a|, |n|) over coordinates with max(|a|, |n|) ≥ scale_floor.
  double max_rel_error = 0.0;
  /// Max |a − n| over coordinates below scale_floor.
  double max_abs_error_small = 0.0;
  std::string worst_param;
  bool passed(double rel_tol = 1e-4, double abs_tol = 1e-8) const {
    return max_rel_error < rel_tol && max_abs_error_small < abs_tol;
  }
};

/// Compares analytic gradients with central differences
/// (L(θ + eps) − L(θ − eps)) / (2·eps) on `samples` randomly chosen scalar
/// parameters. At least one coordinate per tensor is drawn. `build_loss`
/// must be deterministic. Throws ConfigError when eps <= 0.
GradCheckReport finite_difference_check(std::span<ParamTensor* const> params,
                                        const std::function<Var(Tape&)>& build_loss,
                                        double eps, int samples, uint64_t seed,
                                        double scale_floor = 1e-7);

namespace testing {

/// Deliberate gradient bugs, used to prove the gradient checker catches them.
enum class Fault { kNone, kFlipUpdateGateGrad };

void set_fault(Fault f);
Fault fault();

}  // namespace testing

}  // namespace awe::nn

#endif  // AWE_NNCORE_H_
