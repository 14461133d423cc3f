// awe/synthgen.cc

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

#include "awe/synthgen.h"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <random>
#include <set>

namespace awe::synth {

namespace fs = std::filesystem;

void SynthConfig::validate() const {
  auto positive = [](int v, const char* what) {
    if (v <= 0) throw ConfigError(std::string("synth: ") + what + " must be positive");
  };
  positive(n_word_types, "n_word_types");
  positive(min_phones, "min_phones");
  positive(n_phones, "n_phones");
  positive(n_speakers, "n_speakers");
  positive(exemplars_per_speaker_per_word, "exemplars_per_speaker_per_word");
  positive(min_frames_per_phone, "min_frames_per_phone");
  positive(semantic_cluster_count, "semantic_cluster_count");
  positive(semantic_dim, "semantic_dim");
  if (max_phones < min_phones) throw ConfigError("synth: max_phones < min_phones");
  if (max_frames_per_phone < min_frames_per_phone) {
    throw ConfigError("synth: max_frames_per_phone < min_frames_per_phone");
  }
  if (feature_dim != features::kFeatureDim) throw ConfigError("synth: feature_dim must be 39");
  if (n_valid_speakers < 0 || n_test_speakers < 0 ||
      n_valid_speakers + n_test_speakers >= n_speakers) {
    throw ConfigError("synth: need at least one training speaker");
  }
  if (noise_scale < 0.0 || speaker_shift_scale < 0.0 || semantic_jitter < 0.0 ||
      prototype_scale <= 0.0) {
    throw ConfigError("synth: scales must be non-negative");
  }
  if (lemma_variant_rate < 0.0 || lemma_variant_rate > 1.0) {
    throw ConfigError("synth: lemma_variant_rate must lie in [0, 1]");
  }
  if (min_phones * min_frames_per_phone < 5) {
    throw ConfigError("synth: shortest word must span at least 5 frames");
  }
  for (const auto& s : forced_phone_strings) {
    if (s.empty()) throw ConfigError("synth: forced phone string is empty");
    for (int p : s) {
      if (p < 0 || p >= n_phones) throw ConfigError("synth: forced phone out of range");
    }
  }
}

Matrix render_static(const Matrix& prototypes, const std::vector<int>& phones,
                     const std::vector<int>& durations, const RowVector& speaker_shift,
                     double noise_scale, std::mt19937_64& rng) {
  if (phones.size() != durations.size()) throw Error("render_static: duration count mismatch");
  int frames = 0;
  for (int d : durations) frames += d;
  Matrix out(frames, prototypes.cols());
  std::normal_distribution<double> noise(0.0, 1.0);
  int t = 0;
  for (size_t p = 0; p < phones.size(); ++p) {
    for (int k = 0; k < durations[p]; ++k, ++t) {
      out.row(t) = prototypes.row(phones[p]) + speaker_shift;
      if (noise_scale > 0.0) {
        for (Eigen::Index d = 0; d < out.cols(); ++d) out(t, d) += noise_scale * noise(rng);
      }
    }
  }
  return out;
}

namespace {

std::string numbered(const char* prefix, int i, int width) {
  std::ostringstream os;
  os << prefix << std::setw(width) << std::setfill('0') << i;
  return os.str();
}

}  // namespace

SynthCorpus generate_corpus(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SynthCorpus out;

  const int sdim = cfg.static_dim();
  out.prototypes.resize(cfg.n_phones, sdim);
  for (int p = 0; p < cfg.n_phones; ++p) {
    out.phone_names.push_back(numbered("p", p, 2));
    for (int d = 0; d < sdim; ++d) out.prototypes(p, d) = cfg.prototype_scale * gauss(rng);
  }

  Matrix centers(cfg.semantic_cluster_count, cfg.semantic_dim);
  for (Eigen::Index i = 0; i < centers.size(); ++i) centers.data()[i] = gauss(rng);

  std::uniform_int_distribution<int> phone_dist(0, cfg.n_phones - 1);
  std::uniform_int_distribution<int> len_dist(cfg.min_phones, cfg.max_phones);
  std::uniform_int_distribution<int> cluster_dist(0, cfg.semantic_cluster_count - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::set<std::vector<int>> used;
  std::vector<std::string> word_order;
  std::vector<std::vector<int>> strings;
  std::vector<int> clusters;
  for (int w = 0; w < cfg.n_word_types; ++w) {
    std::vector<int> phones;
    int cluster = -1;
    if (w < static_cast<int>(cfg.forced_phone_strings.size())) {
      phones = cfg.forced_phone_strings[w];
      cluster = cluster_dist(rng);
    } else {
      for (int attempt = 0; attempt < 1000; ++attempt) {
        phones.clear();
        const bool variant = w > 0 && unit(rng) < cfg.lemma_variant_rate;
        if (variant) {
          // Same stem as an earlier word, new ending, same semantic cluster.
          std::uniform_int_distribution<int> base_dist(0, w - 1);
          const int base = base_dist(rng);
          const std::vector<int>& stem = strings[base];
          const size_t keep = std::max<size_t>(1, stem.size() - 1);
          phones.assign(stem.begin(), stem.begin() + static_cast<long>(keep));
          const int tail = std::max(1, len_dist(rng) - static_cast<int>(keep));
          for (int k = 0; k < tail && static_cast<int>(phones.size()) < cfg.max_phones + 1; ++k) {
            phones.push_back(phone_dist(rng));
          }
          if (static_cast<int>(phones.size()) < cfg.min_phones) phones.push_back(phone_dist(rng));
          cluster = clusters[base];
        } else {
          const int len = len_dist(rng);
          for (int k = 0; k < len; ++k) phones.push_back(phone_dist(rng));
          cluster = cluster_dist(rng);
        }
        if (!used.contains(phones)) break;
      }
      if (used.contains(phones)) throw ConfigError("synth: could not draw distinct phone strings");
    }
    used.insert(phones);
    strings.push_back(phones);
    clusters.push_back(cluster);
    const std::string word = numbered("w", w, 3);
    word_order.push_back(word);
    out.words[word] = phones;
    out.semantic_cluster[word] = cluster;
    Vector v = centers.row(cluster).transpose();
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) += cfg.semantic_jitter * gauss(rng);
    out.semantic[word] = v;
  }

  const int n_train = cfg.n_speakers - cfg.n_valid_speakers - cfg.n_test_speakers;
  std::vector<std::string> speakers;
  for (int s = 0; s < cfg.n_speakers; ++s) {
    const std::string name = numbered("spk", s, 2);
    speakers.push_back(name);
    RowVector shift(sdim);
    for (int d = 0; d < sdim; ++d) shift(d) = cfg.speaker_shift_scale * gauss(rng);
    out.speaker_shift[name] = shift;
  }

  std::uniform_int_distribution<int> dur_dist(cfg.min_frames_per_phone, cfg.max_frames_per_phone);
  uint64_t index = 0;
  for (int s = 0; s < cfg.n_speakers; ++s) {
    const corpus::Split split = s < n_train ? corpus::Split::kTrain
                                : s < n_train + cfg.n_valid_speakers ? corpus::Split::kValid
                                                                     : corpus::Split::kTest;
    for (const std::string& word : word_order) {
      for (int e = 0; e < cfg.exemplars_per_speaker_per_word; ++e, ++index) {
        std::seed_seq seq{static_cast<uint64_t>(cfg.seed), index, uint64_t{0x5e6}};
        std::mt19937_64 seg_rng(seq);
        SynthSegment seg;
        seg.segment_id = speakers[s] + "_" + word + "_" + std::to_string(e);
        seg.word = word;
        seg.speaker = speakers[s];
        seg.split = split;
        const auto& phones = out.words[word];
        for (size_t p = 0; p < phones.size(); ++p) seg.durations.push_back(dur_dist(seg_rng));
        Matrix stat = render_static(out.prototypes, phones, seg.durations,
                                    out.speaker_shift[speakers[s]], cfg.noise_scale, seg_rng);
        seg.features = features::append_deltas(stat, 2);
        out.segments.push_back(std::move(seg));
      }
    }
  }
  return out;
}

void write_corpus(const SynthCorpus& corpus, const fs::path& dir) {
  fs::create_directories(dir / "feats");
  {
    std::ofstream m(dir / "manifest.tsv");
    if (!m) throw Error("cannot write manifest in " + dir.string());
    m << "segment_id\tword\tspeaker\tsplit\tfeature_path\n";
    for (const SynthSegment& s : corpus.segments) {
      const std::string rel = "feats/" + s.segment_id + ".feat";
      m << s.segment_id << '\t' << s.word << '\t' << s.speaker << '\t'
        << corpus::split_name(s.split) << '\t' << rel << '\n';
      features::write_feature_file(dir / rel, s.features);
    }
  }
  std::map<std::string, std::vector<std::string>> lex;
  for (const auto& [word, phones] : corpus.words) {
    for (int p : phones) lex[word].push_back(corpus.phone_names[p]);
  }
  corpus::Lexicon(lex).save(dir / "lexicon.txt");
  const int dim = corpus.semantic.empty() ? 0 : static_cast<int>(corpus.semantic.begin()->second.size());
  corpus::SemanticLexicon(dim, corpus.semantic).save(dir / "semantic.txt");
}

}  // namespace awe::synth
