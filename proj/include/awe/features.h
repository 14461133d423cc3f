// awe/features.h

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

#ifndef AWE_FEATURES_H_
#define AWE_FEATURES_H_

#include <filesystem>
#include <span>
#include <vector>

#include "awe/common.h"

namespace awe::features {

/// T×39 spectral sequence for one word segment (rows are frames).
using FeatureMatrix = Matrix;

inline constexpr int kFeatureDim = 39;

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;
};

enum class StaticKind {
  kMfcc,    // 13 cepstra + Δ + ΔΔ
  kLogMel,  // 39 raw log-mel energies, no deltas
};

struct FeatureConfig {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  int n_fft = 512;
  int n_mels = 40;
  int n_static = 13;
  int delta_window = 2;
  double log_floor = 1e-10;
  double low_freq = 20.0;
  double high_freq = 0.0;  // <= 0 means Nyquist
  StaticKind kind = StaticKind::kMfcc;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
  int window_samples(int sample_rate) const;
  int hop_samples(int sample_rate) const;
  /// FFT length actually used: n_fft, grown to the next power of two when
  /// the window is longer.
  int fft_size(int sample_rate) const;
};

/// Hamming-windowed frames, T × window. T = floor((N − window)/hop) + 1.
/// Throws Error("segment too short") when N < window.
Matrix frame_signal(const Waveform& wave, const FeatureConfig& cfg);

/// Triangular mel filters on the HTK mel scale, n_mels × (fft/2 + 1).
Matrix mel_filterbank(const FeatureConfig& cfg, int sample_rate);
/// Center frequency (Hz) of every mel filter.
std::vector<double> mel_center_frequencies(const FeatureConfig& cfg, int sample_rate);

/// Per-frame log mel energies, T × n_mels, floored at cfg.log_floor before
/// the log.
Matrix log_mel_energies(const Matrix& frames, const FeatureConfig& cfg, int sample_rate);

/// Power spectrum → mel filterbank → log → orthonormal DCT-II, first
/// n_static coefficients. In kLogMel mode, the log energies themselves.
Matrix mel_static(const Matrix& frames, const FeatureConfig& cfg, int sample_rate);

/// Appends regression deltas and delta-deltas with replicated edge frames.
/// d_t = Σ_{n=1..N} n (c_{t+n} − c_{t−n}) / (2 Σ n²).
FeatureMatrix append_deltas(const Matrix& static_features, int delta_window);

/// Full pipeline: frame → static → deltas. Always T × 39.
FeatureMatrix compute_features(const Waveform& wave, const FeatureConfig& cfg);

/// Reads 16-bit PCM mono RIFF/WAVE. Samples keep their integer scale.
Waveform read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const Waveform& wave);

/// Segment [start_s, end_s) of a waveform.
Waveform slice(const Waveform& wave, double start_s, double end_s);

/// Binary record: {T: u32, dim: u32} then T×dim little-endian f32, row-major.
void write_feature_file(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix read_feature_file(const std::filesystem::path& path);

/// Per-dimension mean and standard deviation.
struct NormStats {
  RowVector mean;
  RowVector stddev;
  bool empty() const { return mean.size() == 0; }
};

NormStats fit_normalization(std::span<const FeatureMatrix* const> segments);
/// (x − mean) / stddev per column; columns with zero spread are only centred.
void apply_normalization(const NormStats& stats, FeatureMatrix& m);

}  // namespace awe::features

#endif  // AWE_FEATURES_H_
