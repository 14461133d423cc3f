// awe/cli.h

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


#ifndef AWE_CLI_H_
#define AWE_CLI_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "awe/config.h"
#include "awe/evaluation.h"

namespace awe::cli {

struct CommonOptions {
  std::filesystem::path config;
  std::optional<uint64_t> seed;
  std::filesystem::path run_dir;
  bool deterministic = false;
  std::vector<std::string> overrides;  // section.key=value, applied last
};

/// Config file, then --set overrides, then --seed and --deterministic.
RunConfig resolve_config(const CommonOptions& opts);

void cmd_synth(const RunConfig& cfg, const std::filesystem::path& out_dir, bool force,
               std::ostream& out);
training::TrainResult cmd_train(const RunConfig& cfg, const std::filesystem::path& corpus_dir,
                                const std::filesystem::path& run_dir, std::ostream& out);
/// With a config that names a model section, a mismatching checkpoint is a
/// ConfigError.
eval::MapResult cmd_eval(const std::filesystem::path& checkpoint,
                         const std::filesystem::path& corpus_dir, const std::string& split,
                         const std::optional<RunConfig>& cfg,
                         const std::filesystem::path& export_path, std::ostream& out);
/// Returns true when every loss mode passes.
bool cmd_check_grad(double eps, uint64_t seed, std::ostream& out);

/// Parses argv and dispatches. Returns the process exit code: 0 ok,
/// 1 runtime failure, 2 usage or configuration error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace awe::cli

#endif  // AWE_CLI_H_
