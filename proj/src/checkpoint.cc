// awe/checkpoint.cc

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

#include "awe/checkpoint.h"

#include <cstring>
#include <fstream>

#include "awe/binio.h"

namespace awe::nn {

namespace {
constexpr char kMagic[8] = {'A', 'W', 'E', 'A', 'R', 'C', '0', '1'};
}

const ParamTensor* Archive::find(const std::string& name) const {
  for (const ParamTensor& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

void save_archive(const std::filesystem::path& path, const nlohmann::json& header,
                  std::span<const ParamTensor* const> tensors, DType dtype) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint: " + path.string());
    out.write(kMagic, sizeof(kMagic));
    const std::string text = header.dump();
    binio::write_u64(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    binio::write_u32(out, static_cast<uint32_t>(tensors.size()));
    for (const ParamTensor* t : tensors) {
      binio::write_u32(out, static_cast<uint32_t>(t->name.size()));
      out.write(t->name.data(), static_cast<std::streamsize>(t->name.size()));
      binio::write_u32(out, 2);
      binio::write_u64(out, static_cast<uint64_t>(t->value.rows()));
      binio::write_u64(out, static_cast<uint64_t>(t->value.cols()));
      binio::write_u8(out, static_cast<uint8_t>(dtype));
      for (Eigen::Index i = 0; i < t->value.rows(); ++i) {
        for (Eigen::Index j = 0; j < t->value.cols(); ++j) {
          if (dtype == DType::kF64) {
            binio::write_f64(out, t->value(i, j));
          } else {
            binio::write_f32(out, static_cast<float>(t->value(i, j)));
          }
        }
      }
    }
    if (!out) throw Error("checkpoint write failed: " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Archive load_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path.string());
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error("not a checkpoint archive: " + path.string());
  }
  Archive a;
  const uint64_t header_len = binio::read_u64(in);
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw Error("truncated checkpoint header: " + path.string());
  a.header = nlohmann::json::parse(text);
  const uint32_t count = binio::read_u32(in);
  for (uint32_t k = 0; k < count; ++k) {
    const uint32_t name_len = binio::read_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const uint32_t ndim = binio::read_u32(in);
    if (ndim < 1 || ndim > 2) throw Error("unsupported tensor rank in " + path.string());
    std::vector<uint64_t> dims(ndim);
    for (uint64_t& d : dims) d = binio::read_u64(in);
    const auto dtype = static_cast<DType>(binio::read_u8(in));
    const auto rows = static_cast<Eigen::Index>(ndim == 2 ? dims[0] : 1);
    const auto cols = static_cast<Eigen::Index>(ndim == 2 ? dims[1] : dims[0]);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (dtype == DType::kF64) {
          m(i, j) = binio::read_f64(in);
        } else if (dtype == DType::kF32) {
          m(i, j) = binio::read_f32(in);
        } else {
          throw Error("unknown dtype in " + path.string());
        }
      }
    }
    if (!in) throw Error("truncated checkpoint: " + path.string());
    a.tensors.emplace_back(std::move(name), std::move(m));
  }
  return a;
}

void restore_parameters(const Archive& archive, std::span<ParamTensor* const> params) {
  for (ParamTensor* p : params) {
    const ParamTensor* src = archive.find(p->name);
    if (src == nullptr) throw Error("checkpoint lacks tensor " + p->name);
    if (src->value.rows() != p->value.rows() || src->value.cols() != p->value.cols()) {
      throw Error("checkpoint shape mismatch for " + p->name);
    }
    p->value = src->value;
    p->zero_grad();
  }
}

}  // namespace awe::nn
