// awe/evaluation.cc

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

#include "awe/evaluation.h"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

namespace awe::eval {

void EmbeddingSet::validate() const {
  const auto n = vectors.rows();
  if (static_cast<Eigen::Index>(words.size()) != n ||
      static_cast<Eigen::Index>(speakers.size()) != n ||
      static_cast<Eigen::Index>(segment_ids.size()) != n) {
    throw Error("embedding set: labels do not match rows");
  }
  if (n < 2) throw Error("embedding set needs at least two vectors");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (vectors.row(i).squaredNorm() == 0.0) throw Error("embedding set holds a zero vector");
  }
}

double average_precision(std::span<const int> ranked_relevance) {
  // Extended precision keeps short rankings exact, e.g. [1, 0, 1] gives 5/6.
  long double sum = 0.0L;
  size_t hits = 0;
  for (size_t k = 0; k < ranked_relevance.size(); ++k) {
    if (ranked_relevance[k] == 0) continue;
    ++hits;
    sum += static_cast<long double>(hits) / static_cast<long double>(k + 1);
  }
  if (hits == 0) throw Error("average precision needs at least one relevant item");
  return static_cast<double>(sum / static_cast<long double>(hits));
}

nlohmann::json MapResult::to_json() const {
  return {{"split", split}, {"n", n}, {"n_positive_pairs", n_positive_pairs}, {"map", map}};
}

namespace {

std::vector<int> label_ids(const std::vector<std::string>& labels) {
  std::map<std::string, int> ids;
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    out.push_back(ids.emplace(l, static_cast<int>(ids.size())).first->second);
  }
  return out;
}

}  // namespace

MapResult same_different_map(const EmbeddingSet& set) {
  set.validate();
  const auto n = static_cast<int>(set.size());
  const std::vector<int> word = label_ids(set.words);
  Vector norms = set.vectors.rowwise().norm();

  struct Pair {
    double d;
    int i;
    int j;
  };
  std::vector<Pair> pairs;
  pairs.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  size_t positives = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = 1.0 - set.vectors.row(i).dot(set.vectors.row(j)) / (norms(i) * norms(j));
      pairs.push_back({d, i, j});
      if (word[i] == word[j]) ++positives;
    }
  }
  if (positives == 0) throw Error("no same-word pair in the evaluation set");
  // Pairs are generated in (i, j) order, so a stable sort keeps that order on ties.
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& a, const Pair& b) { return a.d < b.d; });
  std::vector<int> relevance;
  relevance.reserve(pairs.size());
  for (const Pair& p : pairs) relevance.push_back(word[p.i] == word[p.j] ? 1 : 0);

  MapResult r;
  r.n = set.size();
  r.n_positive_pairs = positives;
  r.map = average_precision(relevance);
  return r;
}

void export_embeddings(const EmbeddingSet& set, const std::filesystem::path& path) {
  if (set.size() == 0) throw Error("no embeddings to export");
  std::ofstream out(path);
  if (!out) throw Error("cannot write embeddings: " + path.string());
  out << std::setprecision(9);
  for (size_t i = 0; i < set.size(); ++i) {
    out << set.segment_ids[i] << '\t' << set.words[i] << '\t' << set.speakers[i];
    for (Eigen::Index d = 0; d < set.vectors.cols(); ++d) {
      out << '\t' << set.vectors(static_cast<Eigen::Index>(i), d);
    }
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

EmbeddingSet import_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings: " + path.string());
  EmbeddingSet set;
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string id, word, speaker;
    std::getline(is, id, '\t');
    std::getline(is, word, '\t');
    std::getline(is, speaker, '\t');
    std::vector<double> v;
    std::string cell;
    while (std::getline(is, cell, '\t')) v.push_back(std::stod(cell));
    if (!rows.empty() && v.size() != rows[0].size()) throw Error("ragged embedding file");
    set.segment_ids.push_back(id);
    set.words.push_back(word);
    set.speakers.push_back(speaker);
    rows.push_back(std::move(v));
  }
  if (rows.empty()) throw Error("empty embedding file: " + path.string());
  set.vectors.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(rows[0].size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t d = 0; d < rows[i].size(); ++d) {
      set.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rows[i][d];
    }
  }
  return set;
}

double neighbor_purity(const EmbeddingSet& set, int k) {
  set.validate();
  const auto n = static_cast<int>(set.size());
  if (k < 1 || k >= n) throw Error("neighbor_purity: need 1 <= k < n");
  const std::vector<int> word = label_ids(set.words);
  Vector norms = set.vectors.rowwise().norm();
  double total = 0.0;
  std::vector<std::pair<double, int>> dist;
  for (int i = 0; i < n; ++i) {
    dist.clear();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      dist.emplace_back(
          1.0 - set.vectors.row(i).dot(set.vectors.row(j)) / (norms(i) * norms(j)), j);
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    int same = 0;
    for (int m = 0; m < k; ++m) same += word[dist[m].second] == word[i] ? 1 : 0;
    total += static_cast<double>(same) / k;
  }
  return total / n;
}

EmbeddingSet embed_split(model::AweModel& model, const corpus::Corpus& corpus,
                         corpus::Split split, size_t batch_size) {
  const std::vector<size_t> idx = corpus.split_indices(split);
  if (idx.empty()) throw Error("split '" + corpus::split_name(split) + "' is empty");
  std::vector<const Matrix*> segments;
  EmbeddingSet set;
  for (size_t i : idx) {
    const corpus::SegmentRecord& r = corpus.records()[i];
    segments.push_back(&r.features);
    set.segment_ids.push_back(r.segment_id);
    set.words.push_back(r.word);
    set.speakers.push_back(r.speaker);
  }
  set.vectors = model.embed_many(segments, batch_size);
  return set;
}

}  // namespace awe::eval
