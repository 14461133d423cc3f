// awe/corpus.cc

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

#include "awe/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "awe/log.h"

namespace awe::corpus {

namespace fs = std::filesystem;

std::string split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "valid" || s == "dev" || s == "validation") return Split::kValid;
  if (s == "test") return Split::kTest;
  throw ConfigError("unknown split '" + s + "'");
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == '\t') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

bool skippable(const std::string& line) {
  return line.empty() || line[0] == '#' ||
         line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

Lexicon::Lexicon(std::map<std::string, std::vector<std::string>> entries) {
  std::set<std::string> phones;
  for (const auto& [word, seq] : entries) {
    if (seq.empty()) throw Error("empty transcription for word '" + word + "'");
    phones.insert(seq.begin(), seq.end());
  }
  inventory_.assign(phones.begin(), phones.end());
  std::unordered_map<std::string, int> index;
  for (size_t i = 0; i < inventory_.size(); ++i) index[inventory_[i]] = static_cast<int>(i);
  for (const auto& [word, seq] : entries) {
    std::vector<int> ids;
    ids.reserve(seq.size());
    for (const std::string& p : seq) ids.push_back(index.at(p));
    ids_.emplace(word, std::move(ids));
  }
}

Lexicon Lexicon::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon: " + path.string());
  std::map<std::string, std::vector<std::string>> entries;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    const size_t tab = line.find('\t');
    std::string word;
    std::vector<std::string> phones;
    if (tab != std::string::npos) {
      word = line.substr(0, tab);
      phones = split_ws(line.substr(tab + 1));
    } else {
      auto toks = split_ws(line);
      word = toks[0];
      phones.assign(toks.begin() + 1, toks.end());
    }
    if (phones.empty()) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": no phones for '" + word + "'");
    }
    entries[word] = std::move(phones);
  }
  return Lexicon(std::move(entries));
}

void Lexicon::save(const fs::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write lexicon: " + path.string());
  for (const auto& [word, ids] : ids_) {
    out << word << '\t';
    for (size_t i = 0; i < ids.size(); ++i) out << (i ? " " : "") << inventory_[ids[i]];
    out << '\n';
  }
}

const std::vector<int>& Lexicon::phones(const std::string& word) const {
  auto it = ids_.find(word);
  if (it == ids_.end()) throw Error("word not in lexicon: " + word);
  return it->second;
}

std::vector<std::string> Lexicon::phone_names(std::span<const int> ids) const {
  std::vector<std::string> out;
  for (int id : ids) {
    if (id == eos()) {
      out.emplace_back("</s>");
    } else if (id == pad()) {
      out.emplace_back("<pad>");
    } else {
      out.push_back(inventory_.at(static_cast<size_t>(id)));
    }
  }
  return out;
}

SemanticLexicon::SemanticLexicon(int dim, std::map<std::string, Vector> vectors)
    : dim_(dim), vectors_(std::move(vectors)) {
  for (const auto& [word, v] : vectors_) {
    if (v.size() != dim_) throw Error("semantic vector dimension mismatch for '" + word + "'");
    if (!v.allFinite()) throw Error("non-finite semantic vector for '" + word + "'");
  }
}

SemanticLexicon SemanticLexicon::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open semantic lexicon: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error("empty semantic lexicon: " + path.string());
  auto head = split_ws(line);
  if (head.size() != 2) throw Error("semantic lexicon header must be 'vocab_size dim'");
  const long declared = std::stol(head[0]);
  const int dim = std::stoi(head[1]);
  if (dim <= 0) throw Error("semantic lexicon dimension must be positive");
  std::map<std::string, Vector> vectors;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    auto toks = split_ws(line);
    if (static_cast<int>(toks.size()) - 1 != dim) {
      std::ostringstream os;
      os << path.string() << ":" << lineno << ": expected " << dim << " values, found "
         << toks.size() - 1;
      throw Error(os.str());
    }
    Vector v(dim);
    for (int k = 0; k < dim; ++k) v(k) = std::stod(toks[k + 1]);
    vectors[toks[0]] = std::move(v);
  }
  if (static_cast<long>(vectors.size()) != declared) {
    log_warning("semantic lexicon declares " + std::to_string(declared) + " words, read " +
                std::to_string(vectors.size()));
  }
  return SemanticLexicon(dim, std::move(vectors));
}

void SemanticLexicon::save(const fs::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write semantic lexicon: " + path.string());
  out << vectors_.size() << ' ' << dim_ << '\n';
  out << std::setprecision(9);
  for (const auto& [word, v] : vectors_) {
    out << word;
    for (Eigen::Index k = 0; k < v.size(); ++k) out << ' ' << v(k);
    out << '\n';
  }
}

const Vector& SemanticLexicon::vector(const std::string& word) const {
  auto it = vectors_.find(word);
  if (it == vectors_.end()) throw Error("word not in semantic lexicon: " + word);
  return it->second;
}

SemanticScaler SemanticScaler::fit(std::span<const Vector* const> targets, double bound) {
  if (targets.empty()) throw Error("cannot fit semantic scaler on no targets");
  SemanticScaler s;
  s.bound = bound;
  Vector lo = *targets[0];
  Vector hi = *targets[0];
  for (const Vector* v : targets) {
    lo = lo.cwiseMin(*v);
    hi = hi.cwiseMax(*v);
  }
  s.minimum = lo;
  s.range = hi - lo;
  return s;
}

SemanticScaler SemanticScaler::identity(int) { return SemanticScaler{}; }

Vector SemanticScaler::apply(const Vector& v) const {
  if (is_identity()) return v;
  if (v.size() != minimum.size()) throw Error("semantic scaler dimension mismatch");
  Vector out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    out(k) = range(k) > 0.0 ? -bound + 2.0 * bound * (v(k) - minimum(k)) / range(k) : 0.0;
  }
  return out;
}

nlohmann::json SemanticScaler::to_json() const {
  nlohmann::json j;
  j["bound"] = bound;
  j["minimum"] = std::vector<double>(minimum.data(), minimum.data() + minimum.size());
  j["range"] = std::vector<double>(range.data(), range.data() + range.size());
  return j;
}

SemanticScaler SemanticScaler::from_json(const nlohmann::json& j) {
  SemanticScaler s;
  s.bound = j.at("bound").get<double>();
  auto lo = j.at("minimum").get<std::vector<double>>();
  auto r = j.at("range").get<std::vector<double>>();
  s.minimum = Eigen::Map<Vector>(lo.data(), static_cast<Eigen::Index>(lo.size()));
  s.range = Eigen::Map<Vector>(r.data(), static_cast<Eigen::Index>(r.size()));
  return s;
}

std::vector<size_t> Corpus::split_indices(Split split) const {
  std::vector<size_t> out;
  for (size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].split == split) out.push_back(i);
  }
  return out;
}

Corpus load_corpus(const fs::path& manifest, const fs::path& lexicon_path,
                   const fs::path& semantic_path, const CorpusOptions& options) {
  Corpus c;
  c.lexicon_ = Lexicon::load(lexicon_path);
  c.semantics_ = SemanticLexicon::load(semantic_path);

  std::ifstream in(manifest);
  if (!in) throw Error("cannot open manifest: " + manifest.string());
  const fs::path base = manifest.parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
  };

  std::map<std::string, int> word_index;
  std::map<std::string, int> speaker_index;
  std::map<fs::path, features::Waveform> wav_cache;
  std::set<std::string> seen_ids;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    auto cols = split_tabs(line);
    if (lineno == 1 && cols[0] == "segment_id") continue;
    if (cols.size() != 5 && cols.size() != 7) {
      throw Error(manifest.string() + ":" + std::to_string(lineno) +
                  ": expected 5 or 7 tab-separated columns");
    }
    SegmentRecord r;
    r.segment_id = cols[0];
    r.word = cols[1];
    r.speaker = cols[2];
    r.split = parse_split(cols[3]);
    if (!seen_ids.insert(r.segment_id).second) {
      throw Error("duplicate segment id '" + r.segment_id + "'");
    }
    if (!c.lexicon_.contains(r.word)) {
      c.skip_reasons_.push_back(r.segment_id + ": word '" + r.word + "' missing from lexicon");
      log_warning("skipping " + c.skip_reasons_.back());
      continue;
    }
    if (!c.semantics_.contains(r.word)) {
      c.skip_reasons_.push_back(r.segment_id + ": word '" + r.word +
                                "' missing from semantic lexicon");
      log_warning("skipping " + c.skip_reasons_.back());
      continue;
    }
    if (cols.size() == 5) {
      r.features = features::read_feature_file(resolve(cols[4]));
    } else {
      const fs::path wav = resolve(cols[4]);
      auto it = wav_cache.find(wav);
      if (it == wav_cache.end()) it = wav_cache.emplace(wav, features::read_wav(wav)).first;
      features::Waveform seg = features::slice(it->second, std::stod(cols[5]), std::stod(cols[6]));
      r.features = features::compute_features(seg, options.feature_config);
    }
    if (r.features.cols() != features::kFeatureDim) {
      throw Error("segment " + r.segment_id + " has " + std::to_string(r.features.cols()) +
                  " feature columns, expected 39");
    }
    auto [wit, wnew] = word_index.emplace(r.word, static_cast<int>(c.words_.size()));
    if (wnew) c.words_.push_back(r.word);
    r.word_id = wit->second;
    auto [sit, snew] = speaker_index.emplace(r.speaker, static_cast<int>(c.speakers_.size()));
    if (snew) c.speakers_.push_back(r.speaker);
    r.speaker_id = sit->second;
    c.records_.push_back(std::move(r));
  }

  std::vector<const features::FeatureMatrix*> train_feats;
  std::vector<bool> train_word(c.words_.size(), false);
  for (const SegmentRecord& r : c.records_) {
    if (r.split != Split::kTrain) continue;
    train_feats.push_back(&r.features);
    train_word[r.word_id] = true;
  }

  if (options.norm_stats) {
    c.norm_ = *options.norm_stats;
  } else if (options.normalize_features && !train_feats.empty()) {
    c.norm_ = features::fit_normalization(train_feats);
  }
  if (!c.norm_.empty()) {
    for (SegmentRecord& r : c.records_) features::apply_normalization(c.norm_, r.features);
  }

  if (options.scaler) {
    c.scaler_ = *options.scaler;
  } else if (options.scale_semantic_targets) {
    std::vector<const Vector*> vocab;
    for (size_t w = 0; w < c.words_.size(); ++w) {
      if (train_word[w]) vocab.push_back(&c.semantics_.vector(c.words_[w]));
    }
    if (!vocab.empty()) c.scaler_ = SemanticScaler::fit(vocab);
  }
  c.targets_.reserve(c.words_.size());
  for (const std::string& w : c.words_) c.targets_.push_back(c.scaler_.apply(c.semantics_.vector(w)));

  if (c.skipped() > 0) {
    log_warning("dropped " + std::to_string(c.skipped()) + " segment(s) with unresolved words");
  }
  return c;
}

Corpus load_corpus_dir(const fs::path& dir, const CorpusOptions& options) {
  return load_corpus(dir / "manifest.tsv", dir / "lexicon.txt", dir / "semantic.txt", options);
}

double type_token_ratio(std::span<const std::string> words) {
  if (words.empty()) throw Error("type-token ratio of an empty split");
  std::set<std::string> types(words.begin(), words.end());
  return static_cast<double>(types.size()) / static_cast<double>(words.size());
}

double type_token_ratio(const Corpus& corpus, Split split) {
  std::vector<std::string> words;
  for (size_t i : corpus.split_indices(split)) words.push_back(corpus.records()[i].word);
  if (words.empty()) throw Error("split '" + split_name(split) + "' is empty");
  return type_token_ratio(words);
}

SplitStats split_stats(const Corpus& corpus, Split split, double frame_ms, double hop_ms) {
  SplitStats s;
  std::set<int> types;
  std::set<int> speakers;
  std::vector<double> durations;
  for (size_t i : corpus.split_indices(split)) {
    const SegmentRecord& r = corpus.records()[i];
    types.insert(r.word_id);
    speakers.insert(r.speaker_id);
    durations.push_back(((static_cast<double>(r.features.rows()) - 1.0) * hop_ms + frame_ms) /
                        1000.0);
  }
  s.segments = durations.size();
  s.types = types.size();
  s.speakers = speakers.size();
  if (s.segments == 0) return s;
  double sum = 0.0;
  for (double d : durations) sum += d;
  s.duration_mean = sum / static_cast<double>(s.segments);
  double sq = 0.0;
  for (double d : durations) sq += (d - s.duration_mean) * (d - s.duration_mean);
  s.duration_sd = std::sqrt(sq / static_cast<double>(s.segments));
  s.ttr = static_cast<double>(s.types) / static_cast<double>(s.segments);
  return s;
}

bool speakers_disjoint(const Corpus& corpus) {
  std::map<int, Split> owner;
  for (const SegmentRecord& r : corpus.records()) {
    auto [it, fresh] = owner.emplace(r.speaker_id, r.split);
    if (!fresh && it->second != r.split) return false;
  }
  return true;
}

std::vector<std::vector<size_t>> plan_batches(std::span<const int> word_labels,
                                              size_t batch_size, uint64_t seed,
                                              bool require_positive_pairs) {
  if (word_labels.empty()) throw Error("cannot batch an empty split");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<size_t>> batches;

  if (!require_positive_pairs) {
    std::vector<size_t> order(word_labels.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < order.size(); start += batch_size) {
      const size_t end = std::min(order.size(), start + batch_size);
      batches.emplace_back(order.begin() + start, order.begin() + end);
    }
    return batches;
  }

  std::map<int, std::vector<size_t>> by_word;
  for (size_t i = 0; i < word_labels.size(); ++i) by_word[word_labels[i]].push_back(i);
  std::vector<std::vector<size_t>> chunks;
  bool any_pair = false;
  for (auto& [word, members] : by_word) {
    std::shuffle(members.begin(), members.end(), rng);
    if (members.size() == 1) {
      chunks.push_back(members);
      continue;
    }
    any_pair = true;
    size_t k = 0;
    while (k < members.size()) {
      const size_t left = members.size() - k;
      const size_t take = left == 3 ? 3 : 2;
      chunks.emplace_back(members.begin() + k, members.begin() + k + take);
      k += take;
    }
  }
  if (!any_pair) throw Error("no positive pairs: every word type has a single exemplar");
  std::shuffle(chunks.begin(), chunks.end(), rng);

  std::vector<size_t> current;
  for (const auto& chunk : chunks) {
    if (!current.empty() && current.size() + chunk.size() > batch_size) {
      batches.push_back(std::move(current));
      current.clear();
    }
    current.insert(current.end(), chunk.begin(), chunk.end());
  }
  if (!current.empty()) batches.push_back(std::move(current));
  return batches;
}

std::vector<std::vector<size_t>> make_batches(const Corpus& corpus, Split split,
                                              size_t batch_size, uint64_t seed,
                                              bool require_positive_pairs) {
  const std::vector<size_t> idx = corpus.split_indices(split);
  if (idx.empty()) throw Error("split '" + split_name(split) + "' is empty");
  std::vector<int> labels;
  labels.reserve(idx.size());
  for (size_t i : idx) labels.push_back(corpus.records()[i].word_id);
  auto plan = plan_batches(labels, batch_size, seed, require_positive_pairs);
  for (auto& batch : plan) {
    for (size_t& pos : batch) pos = idx[pos];
  }
  return plan;
}

Batch assemble_batch(const Corpus& corpus, std::span<const size_t> record_indices) {
  if (record_indices.empty()) throw Error("empty batch");
  const auto& records = corpus.records();
  const auto b = static_cast<Eigen::Index>(record_indices.size());
  Batch batch;
  batch.eos = corpus.lexicon().eos();
  batch.pad = corpus.lexicon().pad();
  int max_frames = 0;
  int max_steps = 0;
  for (size_t idx : record_indices) {
    const SegmentRecord& r = records.at(idx);
    max_frames = std::max(max_frames, static_cast<int>(r.features.rows()));
    max_steps = std::max(max_steps,
                         static_cast<int>(corpus.lexicon().phones(r.word).size()) + 1);
  }
  const int dim = static_cast<int>(records[record_indices[0]].features.cols());
  batch.frames.assign(max_frames, Matrix::Zero(b, dim));
  batch.phone_targets = Eigen::MatrixXi::Constant(b, max_steps, batch.pad);
  const int k = corpus.semantics().dim();
  batch.semantic_targets.resize(b, k);
  for (Eigen::Index i = 0; i < b; ++i) {
    const SegmentRecord& r = records[record_indices[i]];
    const int frames = static_cast<int>(r.features.rows());
    for (int t = 0; t < frames; ++t) batch.frames[t].row(i) = r.features.row(t);
    batch.feature_lengths.push_back(frames);
    const auto& phones = corpus.lexicon().phones(r.word);
    for (size_t s = 0; s < phones.size(); ++s) batch.phone_targets(i, s) = phones[s];
    batch.phone_targets(i, static_cast<Eigen::Index>(phones.size())) = batch.eos;
    batch.phone_lengths.push_back(static_cast<int>(phones.size()) + 1);
    batch.semantic_targets.row(i) = corpus.semantic_target(r.word_id).transpose();
    batch.word_ids.push_back(r.word_id);
    batch.speaker_ids.push_back(r.speaker_id);
    batch.record_indices.push_back(record_indices[i]);
  }
  return batch;
}

}  // namespace awe::corpus
