// awe/checkpoint.h

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

// Flat tensor archive.
//
//   magic        8 bytes  "AWEARC01"
//   header_len   u64
//   header       header_len bytes of UTF-8 JSON
//   count        u32
//   count × { name_len u32, name bytes, ndim u32, dims u64[ndim],
//             dtype u8 (0 = f64, 1 = f32), values little-endian row-major }

#ifndef AWE_CHECKPOINT_H_
#define AWE_CHECKPOINT_H_

#include <filesystem>
#include <span>
#include <vector>

#include "awe/nncore.h"
#include "json.hpp"

namespace awe::nn {

enum class DType : uint8_t { kF64 = 0, kF32 = 1 };

struct Archive {
  nlohmann::json header;
  std::vector<ParamTensor> tensors;

  const ParamTensor* find(const std::string& name) const;
};

void save_archive(const std::filesystem::path& path, const nlohmann::json& header,
                  std::span<const ParamTensor* const> tensors, DType dtype = DType::kF64);
Archive load_archive(const std::filesystem::path& path);

/// Copies archive tensors into params by name. Throws Error on a missing
/// tensor or shape mismatch.
void restore_parameters(const Archive& archive, std::span<ParamTensor* const> params);

}  // namespace awe::nn

#endif  // AWE_CHECKPOINT_H_
