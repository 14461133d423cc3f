// awe/nncore.cc

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

#include "awe/nncore.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace awe::nn {

ParamTensor::ParamTensor(std::string n, Matrix v)
    : name(std::move(n)), value(std::move(v)) {
  zero_grad();
}

double RngState::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(engine_);
}

double RngState::normal(double mean, double stddev) {
  std::normal_distribution<double> d(mean, stddev);
  return d(engine_);
}

bool RngState::bernoulli(double p) {
  std::bernoulli_distribution d(p);
  return d(engine_);
}

const Matrix& Var::value() const { return tape_->value(id_); }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw Error("Var::scalar on a non-scalar value");
  return v(0, 0);
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::param(ParamTensor& p) {
  Node n;
  n.value = p.value;
  n.requires_grad = true;
  n.param = &p;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, BackwardFn fn) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(fn));
}

Var Tape::record(Matrix value, std::span<const Var> inputs, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  for (const Var& v : inputs) {
    if (v.tape() != this) throw Error("op mixes vars from different tapes");
    if (nodes_[v.id()].requires_grad) n.requires_grad = true;
  }
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw Error("backward on a var from another tape");
  Node& root = nodes_[loss.id()];
  if (root.value.size() != 1) throw Error("backward requires a scalar loss");
  if (!std::isfinite(root.value(0, 0))) {
    throw Error("non-finite loss before backprop");
  }
  if (!root.requires_grad) return;
  root.grad = Matrix::Ones(1, 1);
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.param != nullptr) {
      n.param->grad += n.grad;
    } else if (n.backward) {
      n.backward(*this, id);
    }
  }
}

namespace {

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << op << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows()
       << "x" << b.cols();
    throw Error(os.str());
  }
}

testing::Fault g_fault = testing::Fault::kNone;

}  // namespace

namespace testing {
void set_fault(Fault f) { g_fault = f; }
Fault fault() { return g_fault; }
}  // namespace testing

Var add(Var a, Var b) {
  check_same_shape(a, b, "add");
  Tape& t = *a.tape();
  return t.record(a.value() + b.value(), {a, b}, [a, b](Tape& t, int self) {
    t.accumulate(a, t.grad(self));
    t.accumulate(b, t.grad(self));
  });
}

Var sub(Var a, Var b) {
  check_same_shape(a, b, "sub");
  Tape& t = *a.tape();
  return t.record(a.value() - b.value(), {a, b}, [a, b](Tape& t, int self) {
    t.accumulate(a, t.grad(self));
    t.accumulate(b, -t.grad(self));
  });
}

Var mul(Var a, Var b) {
  check_same_shape(a, b, "mul");
  Tape& t = *a.tape();
  return t.record(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    t.accumulate(a, g.cwiseProduct(b.value()));
    t.accumulate(b, g.cwiseProduct(a.value()));
  });
}

Var scale(Var a, double s) {
  Tape& t = *a.tape();
  return t.record(a.value() * s, {a}, [a, s](Tape& t, int self) {
    t.accumulate(a, t.grad(self) * s);
  });
}

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) throw Error("matmul: inner dimension mismatch");
  Tape& t = *a.tape();
  Matrix out = a.value() * b.value();
  return t.record(std::move(out), {a, b}, [a, b](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(a)) t.accumulate(a, g * b.value().transpose());
    if (t.requires_grad(b)) t.accumulate(b, a.value().transpose() * g);
  });
}

Var add_bias(Var a, Var bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) throw Error("add_bias: bad bias shape");
  Tape& t = *a.tape();
  Matrix out = a.value().rowwise() + bias.value().row(0);
  return t.record(std::move(out), {a, bias}, [a, bias](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    t.accumulate(a, g);
    t.accumulate(bias, g.colwise().sum());
  });
}

Var sigmoid(Var a) {
  Tape& t = *a.tape();
  Matrix y = a.value().unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  return t.record(std::move(y), {a}, [a](Tape& t, int self) {
    const Matrix& y = t.value(self);
    t.accumulate(a, t.grad(self).cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
  });
}

Var tanh(Var a) {
  Tape& t = *a.tape();
  Matrix y = a.value().array().tanh().matrix();
  return t.record(std::move(y), {a}, [a](Tape& t, int self) {
    const Matrix& y = t.value(self);
    t.accumulate(a, t.grad(self).cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var relu(Var a) {
  Tape& t = *a.tape();
  Matrix y = a.value().cwiseMax(0.0);
  return t.record(std::move(y), {a}, [a](Tape& t, int self) {
    // Subgradient at 0 is 0.
    Matrix mask = (a.value().array() > 0.0).cast<double>().matrix();
    t.accumulate(a, t.grad(self).cwiseProduct(mask));
  });
}

Var sum(Var a) {
  Tape& t = *a.tape();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return t.record(std::move(out), {a}, [a](Tape& t, int self) {
    double g = t.grad(self)(0, 0);
    t.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g));
  });
}

Var mean(Var a) {
  if (a.value().size() == 0) throw Error("mean of an empty value");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw Error("concat_cols: no inputs");
  Tape& t = *parts[0].tape();
  Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) throw Error("concat_cols: row mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index c = 0;
  for (const Var& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  std::vector<Var> copy(parts.begin(), parts.end());
  return t.record(std::move(out), parts, [copy](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Eigen::Index c = 0;
    for (const Var& p : copy) {
      if (t.requires_grad(p)) t.accumulate(p, g.middleCols(c, p.cols()));
      c += p.cols();
    }
  });
}

Var gather_rows(Var table, std::vector<int> index) {
  Tape& t = *table.tape();
  Matrix out(static_cast<Eigen::Index>(index.size()), table.cols());
  for (size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= table.rows()) throw Error("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(i)) = table.value().row(index[i]);
  }
  return t.record(std::move(out), {table},
                  [table, index = std::move(index)](Tape& t, int self) {
                    const Matrix& g = t.grad(self);
                    Matrix acc = Matrix::Zero(table.rows(), table.cols());
                    for (size_t i = 0; i < index.size(); ++i) {
                      acc.row(index[i]) += g.row(static_cast<Eigen::Index>(i));
                    }
                    t.accumulate(table, acc);
                  });
}

Var blend_rows(const std::vector<bool>& keep, Var take, Var fallback) {
  check_same_shape(take, fallback, "blend_rows");
  if (static_cast<Eigen::Index>(keep.size()) != take.rows()) {
    throw Error("blend_rows: mask length mismatch");
  }
  Tape& t = *take.tape();
  Matrix out = fallback.value();
  for (size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) out.row(static_cast<Eigen::Index>(i)) = take.value().row(i);
  }
  return t.record(std::move(out), {take, fallback},
                  [keep, take, fallback](Tape& t, int self) {
                    const Matrix& g = t.grad(self);
                    Matrix gt = Matrix::Zero(g.rows(), g.cols());
                    Matrix gf = g;
                    for (size_t i = 0; i < keep.size(); ++i) {
                      if (keep[i]) {
                        gt.row(i) = g.row(i);
                        gf.row(i).setZero();
                      }
                    }
                    t.accumulate(take, gt);
                    t.accumulate(fallback, gf);
                  });
}

Var dropout(Var a, double p, bool training, RngState& rng) {
  if (!training || p <= 0.0) return a;
  if (p >= 1.0) throw ConfigError("dropout probability must be < 1");
  Matrix mask(a.rows(), a.cols());
  const double keep_scale = 1.0 / (1.0 - p);
  std::bernoulli_distribution keep(1.0 - p);
  for (Eigen::Index j = 0; j < mask.cols(); ++j) {
    for (Eigen::Index i = 0; i < mask.rows(); ++i) {
      mask(i, j) = keep(rng.engine()) ? keep_scale : 0.0;
    }
  }
  Tape& t = *a.tape();
  return t.record(a.value().cwiseProduct(mask), {a}, [a, mask](Tape& t, int self) {
    t.accumulate(a, t.grad(self).cwiseProduct(mask));
  });
}

Var gru_cell(Var gi, Var gh, Var h_prev) {
  const Eigen::Index hidden = h_prev.cols();
  const Eigen::Index batch = h_prev.rows();
  if (gi.cols() != 3 * hidden || gh.cols() != 3 * hidden || gi.rows() != batch ||
      gh.rows() != batch) {
    throw Error("gru_cell: gate shapes do not match hidden state");
  }
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const Matrix& a = gi.value();
  const Matrix& b = gh.value();
  Matrix r = (a.leftCols(hidden) + b.leftCols(hidden)).unaryExpr(sig);
  Matrix z = (a.middleCols(hidden, hidden) + b.middleCols(hidden, hidden)).unaryExpr(sig);
  Matrix ghn = b.rightCols(hidden);
  Matrix n = (a.rightCols(hidden) + r.cwiseProduct(ghn)).array().tanh().matrix();
  Matrix h = (1.0 - z.array()).matrix().cwiseProduct(n) + z.cwiseProduct(h_prev.value());

  Tape& t = *gi.tape();
  return t.record(std::move(h), {gi, gh, h_prev},
                  [gi, gh, h_prev, r, z, n, ghn, hidden](Tape& t, int self) {
                    const Matrix& g = t.grad(self);
                    Matrix dz = g.cwiseProduct(h_prev.value() - n);
                    Matrix dn = g.cwiseProduct((1.0 - z.array()).matrix());
                    Matrix dn_pre = dn.cwiseProduct((1.0 - n.array().square()).matrix());
                    Matrix dr = dn_pre.cwiseProduct(ghn);
                    Matrix dr_pre = dr.cwiseProduct(r.cwiseProduct((1.0 - r.array()).matrix()));
                    Matrix dz_pre = dz.cwiseProduct(z.cwiseProduct((1.0 - z.array()).matrix()));
                    if (testing::fault() == testing::Fault::kFlipUpdateGateGrad) dz_pre = -dz_pre;

                    if (t.requires_grad(gi)) {
                      Matrix dgi(g.rows(), 3 * hidden);
                      dgi << dr_pre, dz_pre, dn_pre;
                      t.accumulate(gi, dgi);
                    }
                    if (t.requires_grad(gh)) {
                      Matrix dgh(g.rows(), 3 * hidden);
                      dgh << dr_pre, dz_pre, dn_pre.cwiseProduct(r);
                      t.accumulate(gh, dgh);
                    }
                    t.accumulate(h_prev, g.cwiseProduct(z));
                  });
}

Var softmax_cross_entropy(Var logits, const std::vector<int>& targets) {
  const Eigen::Index batch = logits.rows();
  const Eigen::Index classes = logits.cols();
  if (static_cast<Eigen::Index>(targets.size()) != batch) {
    throw Error("softmax_cross_entropy: target count mismatch");
  }
  Matrix probs(batch, classes);
  Matrix loss = Matrix::Zero(batch, 1);
  for (Eigen::Index i = 0; i < batch; ++i) {
    const double mx = logits.value().row(i).maxCoeff();
    RowVector e = (logits.value().row(i).array() - mx).exp().matrix();
    const double z = e.sum();
    probs.row(i) = e / z;
    const int tgt = targets[i];
    if (tgt < 0) continue;
    if (tgt >= classes) throw Error("softmax_cross_entropy: target out of range");
    loss(i, 0) = -(logits.value()(i, tgt) - mx - std::log(z));
  }
  Tape& t = *logits.tape();
  return t.record(std::move(loss), {logits},
                  [logits, targets, probs](Tape& t, int self) {
                    const Matrix& g = t.grad(self);
                    Matrix d = Matrix::Zero(probs.rows(), probs.cols());
                    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
                      const int tgt = targets[i];
                      if (tgt < 0) continue;
                      d.row(i) = probs.row(i) * g(i, 0);
                      d(i, tgt) -= g(i, 0);
                    }
                    t.accumulate(logits, d);
                  });
}

Var row_l2_distance(Var a, Var b, double eps) {
  check_same_shape(a, b, "row_l2_distance");
  Matrix diff = a.value() - b.value();
  Matrix dist = (diff.rowwise().squaredNorm().array() + eps).sqrt().matrix();
  Tape& t = *a.tape();
  return t.record(dist, {a, b}, [a, b, diff, dist](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Matrix unit = diff;
    for (Eigen::Index i = 0; i < unit.rows(); ++i) unit.row(i) *= g(i, 0) / dist(i, 0);
    t.accumulate(a, unit);
    t.accumulate(b, -unit);
  });
}

Var row_cosine_distance(Var a, Var b) {
  check_same_shape(a, b, "row_cosine_distance");
  const Eigen::Index batch = a.rows();
  Vector na = a.value().rowwise().norm();
  Vector nb = b.value().rowwise().norm();
  Vector dots = a.value().cwiseProduct(b.value()).rowwise().sum();
  Matrix d(batch, 1);
  for (Eigen::Index i = 0; i < batch; ++i) {
    if (na(i) == 0.0 || nb(i) == 0.0) throw Error("cosine distance of a zero vector");
    d(i, 0) = 1.0 - dots(i) / (na(i) * nb(i));
  }
  Tape& t = *a.tape();
  return t.record(std::move(d), {a, b}, [a, b, na, nb, dots](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Matrix da(a.rows(), a.cols());
    Matrix db(b.rows(), b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double inv = 1.0 / (na(i) * nb(i));
      const double cosv = dots(i) * inv;
      // d(1 − cos)/da = −(b/(|a||b|) − cos·a/|a|²)
      da.row(i) = -g(i, 0) * (b.value().row(i) * inv - a.value().row(i) * (cosv / (na(i) * na(i))));
      db.row(i) = -g(i, 0) * (a.value().row(i) * inv - b.value().row(i) * (cosv / (nb(i) * nb(i))));
    }
    t.accumulate(a, da);
    t.accumulate(b, db);
  });
}

namespace {

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, RngState& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-bound, bound);
  }
  return m;
}

}  // namespace

LinearParams make_linear(const std::string& name, int in, int out, RngState& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  return LinearParams{ParamTensor(name + ".weight", uniform_matrix(in, out, bound, rng)),
                      ParamTensor(name + ".bias", uniform_matrix(1, out, bound, rng))};
}

Conv1dParams make_conv1d(const std::string& name, int in_channels, int out_channels,
                         int kernel, int stride, RngState& rng) {
  if (kernel < 1 || stride < 1) throw ConfigError("conv1d kernel and stride must be positive");
  const int fan_in = in_channels * kernel;
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Conv1dParams p;
  p.weight = ParamTensor(name + ".weight", uniform_matrix(fan_in, out_channels, bound, rng));
  p.bias = ParamTensor(name + ".bias", uniform_matrix(1, out_channels, bound, rng));
  p.kernel = kernel;
  p.stride = stride;
  p.in_channels = in_channels;
  return p;
}

GruParams make_gru(const std::string& name, int in, int hidden, RngState& rng) {
  const double bound_ih = 1.0 / std::sqrt(static_cast<double>(in));
  const double bound_hh = 1.0 / std::sqrt(static_cast<double>(hidden));
  GruParams p;
  p.w_ih = ParamTensor(name + ".w_ih", uniform_matrix(in, 3 * hidden, bound_ih, rng));
  p.w_hh = ParamTensor(name + ".w_hh", uniform_matrix(hidden, 3 * hidden, bound_hh, rng));
  p.b_ih = ParamTensor(name + ".b_ih", uniform_matrix(1, 3 * hidden, bound_ih, rng));
  p.b_hh = ParamTensor(name + ".b_hh", uniform_matrix(1, 3 * hidden, bound_hh, rng));
  p.hidden = hidden;
  return p;
}

Var linear(Tape& tape, LinearParams& p, Var x) {
  return add_bias(matmul(x, tape.param(p.weight)), tape.param(p.bias));
}

int conv1d_output_length(int frames, int kernel, int stride) {
  if (frames < kernel) return 0;
  return (frames - kernel) / stride + 1;
}

std::vector<Var> conv1d(Tape& tape, Conv1dParams& p, std::span<const Var> frames) {
  const int total = static_cast<int>(frames.size());
  if (total < p.kernel) throw Error("segment too short for front-end");
  const int steps = conv1d_output_length(total, p.kernel, p.stride);
  Var w = tape.param(p.weight);
  Var b = tape.param(p.bias);
  std::vector<Var> out;
  out.reserve(steps);
  for (int s = 0; s < steps; ++s) {
    Var window = concat_cols(frames.subspan(static_cast<size_t>(s) * p.stride, p.kernel));
    out.push_back(add_bias(matmul(window, w), b));
  }
  return out;
}

Var gru_step(Tape& tape, GruParams& p, Var x, Var h_prev) {
  Var gi = add_bias(matmul(x, tape.param(p.w_ih)), tape.param(p.b_ih));
  Var gh = add_bias(matmul(h_prev, tape.param(p.w_hh)), tape.param(p.b_hh));
  return gru_cell(gi, gh, h_prev);
}

Var gru_stack(Tape& tape, std::span<GruParams> layers, std::span<const Var> steps,
              const std::vector<int>& lengths, double dropout_p, bool training,
              RngState& rng) {
  if (layers.empty()) throw ConfigError("gru_stack needs at least one layer");
  if (steps.empty()) throw Error("gru_stack: empty input sequence");
  const Eigen::Index batch = steps[0].rows();
  if (static_cast<Eigen::Index>(lengths.size()) != batch) {
    throw Error("gru_stack: length count mismatch");
  }
  std::vector<Var> inputs(steps.begin(), steps.end());
  Var h;
  for (size_t l = 0; l < layers.size(); ++l) {
    GruParams& p = layers[l];
    h = tape.constant(Matrix::Zero(batch, p.hidden));
    std::vector<Var> outputs;
    outputs.reserve(inputs.size());
    for (size_t s = 0; s < inputs.size(); ++s) {
      std::vector<bool> active(batch);
      bool all = true;
      for (Eigen::Index i = 0; i < batch; ++i) {
        active[i] = static_cast<int>(s) < lengths[i];
        all = all && active[i];
      }
      Var next = gru_step(tape, p, inputs[s], h);
      h = all ? next : blend_rows(active, next, h);
      outputs.push_back(h);
    }
    if (l + 1 < layers.size()) {
      for (Var& o : outputs) o = dropout(o, dropout_p, training, rng);
    }
    inputs = std::move(outputs);
  }
  return h;
}

void zero_grads(std::span<ParamTensor* const> params) {
  for (ParamTensor* p : params) p->zero_grad();
}

double global_grad_norm(std::span<ParamTensor* const> params) {
  double sq = 0.0;
  for (const ParamTensor* p : params) sq += p->grad.squaredNorm();
  return std::sqrt(sq);
}

double clip_grad_norm(std::span<ParamTensor* const> params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (ParamTensor* p : params) p->grad *= s;
  }
  return norm;
}

bool all_finite(std::span<ParamTensor* const> params) {
  for (const ParamTensor* p : params) {
    if (!p->value.allFinite()) return false;
  }
  return true;
}

size_t count_parameters(std::span<ParamTensor* const> params) {
  size_t n = 0;
  for (const ParamTensor* p : params) n += static_cast<size_t>(p->size());
  return n;
}

GradCheckReport finite_difference_check(std::span<ParamTensor* const> params,
                                        const std::function<Var(Tape&)>& build_loss,
                                        double eps, int samples, uint64_t seed,
                                        double scale_floor) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw ConfigError("finite difference step must be positive");
  }
  if (params.empty()) throw ConfigError("no parameters to check");

  zero_grads(params);
  {
    Tape tape;
    Var loss = build_loss(tape);
    tape.backward(loss);
  }
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (const ParamTensor* p : params) analytic.push_back(p->grad);

  auto eval = [&]() {
    Tape tape;
    return build_loss(tape).scalar();
  };

  // One coordinate from every tensor first, then uniformly over all scalars.
  RngState rng(seed);
  std::vector<std::pair<size_t, Eigen::Index>> picks;
  for (size_t k = 0; k < params.size(); ++k) {
    std::uniform_int_distribution<Eigen::Index> d(0, params[k]->size() - 1);
    picks.emplace_back(k, d(rng.engine()));
  }
  const size_t total = count_parameters(params);
  std::uniform_int_distribution<size_t> any(0, total - 1);
  while (static_cast<int>(picks.size()) < samples) {
    size_t flat = any(rng.engine());
    size_t k = 0;
    while (flat >= static_cast<size_t>(params[k]->size())) {
      flat -= static_cast<size_t>(params[k]->size());
      ++k;
    }
    picks.emplace_back(k, static_cast<Eigen::Index>(flat));
  }

  GradCheckReport report;
  for (const auto& [k, flat] : picks) {
    double& theta = params[k]->value.data()[flat];
    const double saved = theta;
    theta = saved + eps;
    const double up = eval();
    theta = saved - eps;
    const double down = eval();
    theta = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double exact = analytic[k].data()[flat];
    const double err = std::abs(exact - numeric);
    const double scale_v = std::max(std::abs(exact), std::abs(numeric));
    ++report.sampled;
    if (scale_v >= scale_floor) {
      const double rel = err / scale_v;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = params[k]->name;
      }
    } else if (err > report.max_abs_error_small) {
      report.max_abs_error_small = err;
    }
  }
  return report;
}

}  // namespace awe::nn
