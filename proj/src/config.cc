// awe/config.cc

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


#include "awe/config.h"

#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace awe {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool is_bare_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  }
  return true;
}

nlohmann::json parse_value(const std::string& raw, int line_no) {
  auto fail = [&](const std::string& what) {
    return ConfigError("config line " + std::to_string(line_no) + ": " + what);
  };
  const std::string v = trim(raw);
  if (v.empty()) throw fail("missing value");
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') throw fail("unterminated string");
    return v.substr(1, v.size() - 2);
  }
  std::string digits = v;
  std::erase(digits, '_');
  const bool integral = digits.find_first_of(".eE") == std::string::npos &&
                        digits.find("inf") == std::string::npos &&
                        digits.find("nan") == std::string::npos;
  size_t used = 0;
  try {
    if (integral) {
      const long long n = std::stoll(digits, &used);
      if (used == digits.size()) return n;
    } else {
      const double d = std::stod(digits, &used);
      if (used == digits.size()) return d;
    }
  } catch (const std::exception&) {
  }
  throw fail("cannot parse value '" + v + "'");
}

template <class T>
void assign(const nlohmann::json& j, T& out, const std::string& name) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!j.is_boolean()) throw ConfigError("");
      out = j.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!j.is_string()) throw ConfigError("");
      out = j.get<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!j.is_number()) throw ConfigError("");
      out = j.get<T>();
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError("");
      out = static_cast<T>(j.get<long long>());
    } else {
      if (!j.is_number_integer()) throw ConfigError("");
      out = j.get<T>();
    }
  } catch (const ConfigError&) {
    throw ConfigError("config: bad value for " + name + ": " + j.dump());
  }
}

void assign(const nlohmann::json& j, training::LossMode& out, const std::string& name) {
  std::string s;
  assign(j, s, name);
  out = training::parse_loss_mode(s);
}

void assign(const nlohmann::json& j, features::StaticKind& out, const std::string& name) {
  std::string s;
  assign(j, s, name);
  if (s == "mfcc") {
    out = features::StaticKind::kMfcc;
  } else if (s == "logmel") {
    out = features::StaticKind::kLogMel;
  } else {
    throw ConfigError("config: " + name + " must be \"mfcc\" or \"logmel\"");
  }
}

template <class T>
nlohmann::json emit(const T& v) {
  return v;
}
nlohmann::json emit(const training::LossMode& m) { return training::loss_mode_name(m); }
nlohmann::json emit(const features::StaticKind& k) {
  return k == features::StaticKind::kMfcc ? "mfcc" : "logmel";
}

// Calls f(section, key, field) for every configurable field.
template <class Config, class F>
void visit_fields(Config& c, F&& f) {
  auto& s = c.synth;
  f("synth", "n_word_types", s.n_word_types);
  f("synth", "min_phones", s.min_phones);
  f("synth", "max_phones", s.max_phones);
  f("synth", "n_phones", s.n_phones);
  f("synth", "n_speakers", s.n_speakers);
  f("synth", "n_valid_speakers", s.n_valid_speakers);
  f("synth", "n_test_speakers", s.n_test_speakers);
  f("synth", "exemplars_per_speaker_per_word", s.exemplars_per_speaker_per_word);
  f("synth", "min_frames_per_phone", s.min_frames_per_phone);
  f("synth", "max_frames_per_phone", s.max_frames_per_phone);
  f("synth", "prototype_scale", s.prototype_scale);
  f("synth", "speaker_shift_scale", s.speaker_shift_scale);
  f("synth", "noise_scale", s.noise_scale);
  f("synth", "semantic_cluster_count", s.semantic_cluster_count);
  f("synth", "semantic_jitter", s.semantic_jitter);
  f("synth", "lemma_variant_rate", s.lemma_variant_rate);
  f("synth", "semantic_dim", s.semantic_dim);
  f("synth", "seed", s.seed);

  auto& fe = c.features;
  f("features", "frame_ms", fe.frame_ms);
  f("features", "hop_ms", fe.hop_ms);
  f("features", "n_fft", fe.n_fft);
  f("features", "n_mels", fe.n_mels);
  f("features", "n_static", fe.n_static);
  f("features", "delta_window", fe.delta_window);
  f("features", "log_floor", fe.log_floor);
  f("features", "low_freq", fe.low_freq);
  f("features", "high_freq", fe.high_freq);
  f("features", "kind", fe.kind);
  f("features", "normalize", c.normalize_features);
  f("features", "scale_semantic_targets", c.scale_semantic_targets);

  auto& m = c.model;
  f("model", "conv_filters", m.conv_filters);
  f("model", "kernel", m.kernel);
  f("model", "stride", m.stride);
  f("model", "gru_layers", m.gru_layers);
  f("model", "hidden", m.hidden);
  f("model", "dropout", m.dropout);

  auto& t = c.train;
  f("train", "epochs", t.epochs);
  f("train", "batch_size", t.batch_size);
  f("train", "lr", t.lr);
  f("train", "lr_factor", t.lr_factor);
  f("train", "lr_patience", t.lr_patience);
  f("train", "min_lr", t.min_lr);
  f("train", "clip_norm", t.clip_norm);
  f("train", "seed", t.seed);
  f("train", "loss_mode", t.loss_mode);
  f("train", "margin", t.margin);
  f("train", "alpha", t.alpha);
  f("train", "beta", t.beta);
  f("train", "deterministic", t.deterministic);
  f("train", "save_every_epoch", t.save_every_epoch);

  f("eval", "split", c.eval.split);
  f("eval", "batch_size", c.eval.batch_size);
}

}  // namespace

nlohmann::json parse_toml(const std::string& text) {
  nlohmann::json out = nlohmann::json::object();
  std::string section;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": bad section");
      section = trim(s.substr(1, s.size() - 2));
      if (!is_bare_key(section)) {
        throw ConfigError("config line " + std::to_string(line_no) + ": bad section name");
      }
      if (!out.contains(section)) out[section] = nlohmann::json::object();
      continue;
    }
    const size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(s.substr(0, eq));
    if (!is_bare_key(key)) throw ConfigError("config line " + std::to_string(line_no) + ": bad key");
    if (section.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": key outside a section");
    }
    if (out[section].contains(key)) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key " + key);
    }
    out[section][key] = parse_value(s.substr(eq + 1), line_no);
  }
  return out;
}

nlohmann::json parse_toml_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_toml(ss.str());
}

std::string to_toml(const nlohmann::json& sections) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [name, body] : sections.items()) {
    if (!first) os << '\n';
    first = false;
    os << '[' << name << "]\n";
    for (const auto& [key, value] : body.items()) {
      os << key << " = ";
      if (value.is_number_float()) {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof(buf), value.get<double>());
        std::string text(buf, res.ptr);
        if (text.find_first_of(".eEn") == std::string::npos) text += ".0";
        os << text;
      } else {
        os << value.dump();
      }
      os << '\n';
    }
  }
  return os.str();
}

void RunConfig::apply(const nlohmann::json& sections) {
  std::set<std::string> known;
  visit_fields(*this, [&](const char* sec, const char* key, auto&) {
    known.insert(std::string(sec) + "." + key);
  });
  for (const auto& [sec, body] : sections.items()) {
    if (!body.is_object()) throw ConfigError("config: '" + sec + "' is not a section");
    for (const auto& [key, value] : body.items()) {
      if (!known.contains(sec + "." + key)) throw ConfigError("config: unknown key " + sec + "." + key);
    }
  }
  visit_fields(*this, [&](const char* sec, const char* key, auto& field) {
    if (sections.contains(sec) && sections[sec].contains(key)) {
      assign(sections[sec][key], field, std::string(sec) + "." + key);
    }
  });
}

void RunConfig::set(const std::string& assignment) {
  const size_t eq = assignment.find('=');
  const size_t dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override must look like section.key=value: " + assignment);
  }
  const std::string sec = trim(assignment.substr(0, dot));
  const std::string key = trim(assignment.substr(dot + 1, eq - dot - 1));
  const std::string raw = trim(assignment.substr(eq + 1));
  nlohmann::json value;
  try {
    value = parse_value(raw, 0);
  } catch (const ConfigError&) {
    value = raw;
  }
  apply({{sec, {{key, value}}}});
}

void RunConfig::set_seed(uint64_t seed) {
  synth.seed = seed;
  train.seed = seed;
}

void RunConfig::validate() const {
  synth.validate();
  features.validate();
  model::ModelConfig m = model;
  if (m.phone_inventory_size <= 0) m.phone_inventory_size = 1;
  m.validate();
  train.validate();
  corpus::parse_split(eval.split);
  if (eval.batch_size == 0) throw ConfigError("eval: batch_size must be >= 1");
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json out = nlohmann::json::object();
  visit_fields(*this, [&](const char* sec, const char* key, auto& field) {
    out[sec][key] = emit(field);
  });
  return out;
}

std::string RunConfig::to_toml() const { return awe::to_toml(to_json()); }

corpus::CorpusOptions RunConfig::corpus_options() const {
  corpus::CorpusOptions o;
  o.normalize_features = normalize_features;
  o.scale_semantic_targets = scale_semantic_targets;
  o.feature_config = features;
  return o;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig c;
  c.apply(parse_toml_file(path));
  return c;
}

}  // namespace awe
