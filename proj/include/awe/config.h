// awe/config.h

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

// Run configuration. Files use a small TOML subset:
//
//   # comment
//   [section]
//   key = 12            # integer
//   key = 1e-3          # float
//   key = true          # boolean
//   key = "text"        # string
//
// Unknown sections or keys are configuration errors.

#ifndef AWE_CONFIG_H_
#define AWE_CONFIG_H_

#include <filesystem>
#include <string>

#include "awe/corpus.h"
#include "awe/features.h"
#include "awe/model.h"
#include "awe/synthgen.h"
#include "awe/training.h"
#include "json.hpp"

namespace awe {

/// Parses the TOML subset into {section: {key: value}}. Throws ConfigError
/// with the line number on malformed input.
nlohmann::json parse_toml(const std::string& text);
nlohmann::json parse_toml_file(const std::filesystem::path& path);
std::string to_toml(const nlohmann::json& sections);

struct EvalConfig {
  std::string split = "test";
  size_t batch_size = 128;
};

struct RunConfig {
  synth::SynthConfig synth;
  features::FeatureConfig features;
  bool normalize_features = true;
  bool scale_semantic_targets = true;
  model::ModelConfig model;
  training::TrainConfig train;
  EvalConfig eval;

  /// Overlays the sections present in `sections` onto this config.
  void apply(const nlohmann::json& sections);
  /// Applies one "section.key=value" override.
  void set(const std::string& assignment);
  void set_seed(uint64_t seed);
  /// Throws ConfigError on the first invalid field.
  void validate() const;
  nlohmann::json to_json() const;
  std::string to_toml() const;
  corpus::CorpusOptions corpus_options() const;
};

RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace awe

#endif  // AWE_CONFIG_H_
