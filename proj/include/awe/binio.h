// awe/binio.h

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

// Little-endian scalar I/O, independent of host byte order.

#ifndef AWE_BINIO_H_
#define AWE_BINIO_H_

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>

namespace awe::binio {

template <typename U>
void write_le(std::ostream& out, U v) {
  char buf[sizeof(U)];
  for (size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  out.write(buf, sizeof(U));
}

template <typename U>
U read_le(std::istream& in) {
  unsigned char buf[sizeof(U)] = {};
  in.read(reinterpret_cast<char*>(buf), sizeof(U));
  U v = 0;
  for (size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

inline void write_u8(std::ostream& out, uint8_t v) { write_le<uint8_t>(out, v); }
inline void write_u16(std::ostream& out, uint16_t v) { write_le<uint16_t>(out, v); }
inline void write_u32(std::ostream& out, uint32_t v) { write_le<uint32_t>(out, v); }
inline void write_u64(std::ostream& out, uint64_t v) { write_le<uint64_t>(out, v); }
inline void write_f32(std::ostream& out, float v) { write_u32(out, std::bit_cast<uint32_t>(v)); }
inline void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<uint64_t>(v)); }

inline uint8_t read_u8(std::istream& in) { return read_le<uint8_t>(in); }
inline uint16_t read_u16(std::istream& in) { return read_le<uint16_t>(in); }
inline uint32_t read_u32(std::istream& in) { return read_le<uint32_t>(in); }
inline uint64_t read_u64(std::istream& in) { return read_le<uint64_t>(in); }
inline float read_f32(std::istream& in) { return std::bit_cast<float>(read_u32(in)); }
inline double read_f64(std::istream& in) { return std::bit_cast<double>(read_u64(in)); }

}  // namespace awe::binio

#endif  // AWE_BINIO_H_
