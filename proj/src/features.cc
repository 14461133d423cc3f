// awe/features.cc

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

#include "awe/features.h"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>

#include "awe/binio.h"

namespace awe::features {

void FeatureConfig::validate() const {
  if (!(frame_ms > hop_ms && hop_ms > 0.0)) {
    throw ConfigError("features: need frame_ms > hop_ms > 0");
  }
  if (n_fft < 2) throw ConfigError("features: n_fft too small");
  if (delta_window < 1) throw ConfigError("features: delta_window must be >= 1");
  if (!(log_floor > 0.0)) throw ConfigError("features: log_floor must be positive");
  if (kind == StaticKind::kMfcc) {
    if (n_static * 3 != kFeatureDim) throw ConfigError("features: n_static * 3 must be 39");
    if (n_mels < n_static) throw ConfigError("features: n_mels must be >= n_static");
  } else if (n_mels != kFeatureDim) {
    throw ConfigError("features: log-mel mode needs n_mels = 39");
  }
}

int FeatureConfig::window_samples(int sample_rate) const {
  return static_cast<int>(std::lround(frame_ms * sample_rate / 1000.0));
}

int FeatureConfig::hop_samples(int sample_rate) const {
  return static_cast<int>(std::lround(hop_ms * sample_rate / 1000.0));
}

int FeatureConfig::fft_size(int sample_rate) const {
  int n = n_fft;
  const int window = window_samples(sample_rate);
  while (n < window) n *= 2;
  return n;
}

Matrix frame_signal(const Waveform& wave, const FeatureConfig& cfg) {
  cfg.validate();
  if (wave.sample_rate <= 0) throw ConfigError("waveform sample rate must be positive");
  const int window = cfg.window_samples(wave.sample_rate);
  const int hop = cfg.hop_samples(wave.sample_rate);
  const int n = static_cast<int>(wave.samples.size());
  if (n < window) throw Error("segment too short");
  const int frames = (n - window) / hop + 1;

  RowVector hamming(window);
  for (int i = 0; i < window; ++i) {
    hamming(i) = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (window - 1));
  }
  Matrix out(frames, window);
  for (int t = 0; t < frames; ++t) {
    for (int i = 0; i < window; ++i) {
      out(t, i) = wave.samples[static_cast<size_t>(t) * hop + i] * hamming(i);
    }
  }
  return out;
}

namespace {

double hz_to_mel(double hz) { return 1127.0 * std::log1p(hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * std::expm1(mel / 1127.0); }

double upper_frequency(const FeatureConfig& cfg, int sample_rate) {
  const double nyquist = 0.5 * sample_rate;
  return cfg.high_freq > 0.0 ? std::min(cfg.high_freq, nyquist) : nyquist;
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Power spectrum |X_k|², k = 0..n/2, of every row zero-padded to n.
Matrix power_spectrum(const Matrix& frames, int n) {
  const int bins = n / 2 + 1;
  double* in = fftw_alloc_real(n);
  fftw_complex* out = fftw_alloc_complex(bins);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }
  Matrix power(frames.rows(), bins);
  for (Eigen::Index t = 0; t < frames.rows(); ++t) {
    std::fill(in, in + n, 0.0);
    for (Eigen::Index i = 0; i < frames.cols(); ++i) in[i] = frames(t, i);
    fftw_execute(plan);
    for (int k = 0; k < bins; ++k) power(t, k) = out[k][0] * out[k][0] + out[k][1] * out[k][1];
  }
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return power;
}

}  // namespace

Matrix mel_filterbank(const FeatureConfig& cfg, int sample_rate) {
  const int n = cfg.fft_size(sample_rate);
  const int bins = n / 2 + 1;
  const double lo = hz_to_mel(cfg.low_freq);
  const double hi = hz_to_mel(upper_frequency(cfg, sample_rate));
  const double delta = (hi - lo) / (cfg.n_mels + 1);
  Matrix fb = Matrix::Zero(cfg.n_mels, bins);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double left = lo + m * delta;
    const double center = left + delta;
    const double right = center + delta;
    for (int k = 0; k < bins; ++k) {
      const double mel = hz_to_mel(static_cast<double>(k) * sample_rate / n);
      if (mel > left && mel < right) {
        fb(m, k) = mel <= center ? (mel - left) / (center - left) : (right - mel) / (right - center);
      }
    }
  }
  return fb;
}

std::vector<double> mel_center_frequencies(const FeatureConfig& cfg, int sample_rate) {
  const double lo = hz_to_mel(cfg.low_freq);
  const double hi = hz_to_mel(upper_frequency(cfg, sample_rate));
  const double delta = (hi - lo) / (cfg.n_mels + 1);
  std::vector<double> centers(cfg.n_mels);
  for (int m = 0; m < cfg.n_mels; ++m) centers[m] = mel_to_hz(lo + (m + 1) * delta);
  return centers;
}

Matrix log_mel_energies(const Matrix& frames, const FeatureConfig& cfg, int sample_rate) {
  cfg.validate();
  const int n = cfg.fft_size(sample_rate);
  if (frames.cols() > n) throw Error("frame longer than FFT size");
  Matrix power = power_spectrum(frames, n);
  Matrix energies = power * mel_filterbank(cfg, sample_rate).transpose();
  return energies.unaryExpr([&](double e) { return std::log(std::max(e, cfg.log_floor)); });
}

Matrix mel_static(const Matrix& frames, const FeatureConfig& cfg, int sample_rate) {
  Matrix logmel = log_mel_energies(frames, cfg, sample_rate);
  if (cfg.kind == StaticKind::kLogMel) return logmel;

  // Orthonormal DCT-II basis, n_mels × n_static.
  const int m = cfg.n_mels;
  Matrix basis(m, cfg.n_static);
  for (int k = 0; k < cfg.n_static; ++k) {
    const double norm = k == 0 ? std::sqrt(1.0 / m) : std::sqrt(2.0 / m);
    for (int j = 0; j < m; ++j) {
      basis(j, k) = norm * std::cos(std::numbers::pi * k * (j + 0.5) / m);
    }
  }
  return logmel * basis;
}

FeatureMatrix append_deltas(const Matrix& static_features, int delta_window) {
  if (static_features.rows() < 1) throw Error("append_deltas: no frames");
  if (delta_window < 1) throw ConfigError("append_deltas: window must be >= 1");
  const Eigen::Index frames = static_features.rows();
  const Eigen::Index dim = static_features.cols();
  double denom = 0.0;
  for (int n = 1; n <= delta_window; ++n) denom += n * n;
  denom *= 2.0;

  auto delta = [&](const Matrix& in) {
    Matrix out = Matrix::Zero(frames, dim);
    for (Eigen::Index t = 0; t < frames; ++t) {
      for (int n = 1; n <= delta_window; ++n) {
        const Eigen::Index ahead = std::min<Eigen::Index>(t + n, frames - 1);
        const Eigen::Index behind = std::max<Eigen::Index>(t - n, 0);
        out.row(t) += n * (in.row(ahead) - in.row(behind));
      }
    }
    return Matrix(out / denom);
  };

  Matrix d1 = delta(static_features);
  Matrix d2 = delta(d1);
  FeatureMatrix out(frames, 3 * dim);
  out << static_features, d1, d2;
  return out;
}

FeatureMatrix compute_features(const Waveform& wave, const FeatureConfig& cfg) {
  Matrix frames = frame_signal(wave, cfg);
  Matrix stat = mel_static(frames, cfg, wave.sample_rate);
  if (cfg.kind == StaticKind::kLogMel) return stat;
  return append_deltas(stat, cfg.delta_window);
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open wav file: " + path.string());
  std::array<char, 4> id{};
  in.read(id.data(), 4);
  if (std::memcmp(id.data(), "RIFF", 4) != 0) throw Error("not a RIFF file: " + path.string());
  binio::read_u32(in);
  in.read(id.data(), 4);
  if (std::memcmp(id.data(), "WAVE", 4) != 0) throw Error("not a WAVE file: " + path.string());

  Waveform wave;
  bool have_fmt = false;
  while (in.read(id.data(), 4)) {
    const uint32_t size = binio::read_u32(in);
    if (std::memcmp(id.data(), "fmt ", 4) == 0) {
      const uint16_t format = binio::read_u16(in);
      const uint16_t channels = binio::read_u16(in);
      wave.sample_rate = static_cast<int>(binio::read_u32(in));
      binio::read_u32(in);  // byte rate
      binio::read_u16(in);  // block align
      const uint16_t bits = binio::read_u16(in);
      if (format != 1 || channels != 1 || bits != 16) {
        throw Error("only 16-bit PCM mono wav is supported: " + path.string());
      }
      in.seekg(size - 16 + (size & 1u), std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(id.data(), "data", 4) == 0) {
      if (!have_fmt) throw Error("wav data chunk before fmt chunk: " + path.string());
      wave.samples.resize(size / 2);
      for (double& s : wave.samples) s = static_cast<int16_t>(binio::read_u16(in));
      return wave;
    } else {
      in.seekg(size + (size & 1u), std::ios::cur);
    }
  }
  throw Error("wav file has no data chunk: " + path.string());
}

void write_wav(const std::filesystem::path& path, const Waveform& wave) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write wav file: " + path.string());
  const uint32_t data_bytes = static_cast<uint32_t>(wave.samples.size() * 2);
  out.write("RIFF", 4);
  binio::write_u32(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  binio::write_u32(out, 16);
  binio::write_u16(out, 1);
  binio::write_u16(out, 1);
  binio::write_u32(out, static_cast<uint32_t>(wave.sample_rate));
  binio::write_u32(out, static_cast<uint32_t>(wave.sample_rate * 2));
  binio::write_u16(out, 2);
  binio::write_u16(out, 16);
  out.write("data", 4);
  binio::write_u32(out, data_bytes);
  for (double s : wave.samples) {
    const double clipped = std::clamp(std::round(s), -32768.0, 32767.0);
    binio::write_u16(out, static_cast<uint16_t>(static_cast<int16_t>(clipped)));
  }
}

Waveform slice(const Waveform& wave, double start_s, double end_s) {
  if (!(end_s > start_s) || start_s < 0.0) throw Error("bad segment boundaries");
  const auto first = static_cast<size_t>(std::lround(start_s * wave.sample_rate));
  const auto last = std::min(wave.samples.size(),
                             static_cast<size_t>(std::lround(end_s * wave.sample_rate)));
  if (first >= last) throw Error("segment lies outside the waveform");
  Waveform out;
  out.sample_rate = wave.sample_rate;
  out.samples.assign(wave.samples.begin() + first, wave.samples.begin() + last);
  return out;
}

void write_feature_file(const std::filesystem::path& path, const FeatureMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write feature file: " + path.string());
  binio::write_u32(out, static_cast<uint32_t>(m.rows()));
  binio::write_u32(out, static_cast<uint32_t>(m.cols()));
  for (Eigen::Index t = 0; t < m.rows(); ++t) {
    for (Eigen::Index d = 0; d < m.cols(); ++d) binio::write_f32(out, static_cast<float>(m(t, d)));
  }
  if (!out) throw Error("write failed: " + path.string());
}

FeatureMatrix read_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open feature file: " + path.string());
  const uint32_t frames = binio::read_u32(in);
  const uint32_t dim = binio::read_u32(in);
  if (frames == 0 || dim == 0) throw Error("empty feature file: " + path.string());
  FeatureMatrix m(frames, dim);
  for (uint32_t t = 0; t < frames; ++t) {
    for (uint32_t d = 0; d < dim; ++d) m(t, d) = binio::read_f32(in);
  }
  if (!in) throw Error("truncated feature file: " + path.string());
  if (!m.allFinite()) throw Error("non-finite values in feature file: " + path.string());
  return m;
}

NormStats fit_normalization(std::span<const FeatureMatrix* const> segments) {
  if (segments.empty()) throw Error("fit_normalization: no segments");
  const Eigen::Index dim = segments[0]->cols();
  RowVector sum = RowVector::Zero(dim);
  RowVector sq = RowVector::Zero(dim);
  double count = 0.0;
  for (const FeatureMatrix* m : segments) {
    if (m->cols() != dim) throw Error("fit_normalization: dimension mismatch");
    sum += m->colwise().sum();
    sq += m->array().square().matrix().colwise().sum();
    count += static_cast<double>(m->rows());
  }
  NormStats s;
  s.mean = sum / count;
  RowVector var = (sq / count).array() - s.mean.array().square();
  s.stddev = var.cwiseMax(0.0).cwiseSqrt();
  return s;
}

void apply_normalization(const NormStats& stats, FeatureMatrix& m) {
  if (stats.empty()) return;
  if (m.cols() != stats.mean.size()) throw Error("apply_normalization: dimension mismatch");
  for (Eigen::Index d = 0; d < m.cols(); ++d) {
    m.col(d).array() -= stats.mean(d);
    if (stats.stddev(d) > 1e-12) m.col(d) /= stats.stddev(d);
  }
}

}  // namespace awe::features
