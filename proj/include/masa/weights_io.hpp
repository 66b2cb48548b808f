// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "masa/common.hpp"

namespace masa {

/// A shaped block of 32-bit floats. Convolution weights use dims
/// (c_out, c_in, k, k); biases use (c_out).
struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }
};

// Weight files are little-endian throughout:
//   u32 tensor_count, then per tensor: u32 ndim, ndim x u32 dims, f32 data.
// The same container backs encoder stacks, predictor layers and DRAM kernels.

namespace detail {

inline void write_u32(std::FILE* f, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  if (std::fwrite(b, 1, 4, f) != 4) throw IoError("weight file: short write");
}

inline std::uint32_t read_u32(std::FILE* f, const std::string& path) {
  unsigned char b[4];
  if (std::fread(b, 1, 4, f) != 4) throw IoError(path + ": truncated weight file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_f32(std::FILE* f, float v) {
  std::uint32_t u;
  std::memcpy(&u, &v, 4);
  write_u32(f, u);
}

inline float read_f32(std::FILE* f, const std::string& path) {
  const std::uint32_t u = read_u32(f, path);
  float v;
  std::memcpy(&v, &u, 4);
  return v;
}

}  // namespace detail

inline void write_weights(const std::vector<Tensor>& tensors, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  try {
    detail::write_u32(f, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
      require(t.data.size() == t.element_count(), "write_weights: dims/size mismatch");
      detail::write_u32(f, static_cast<std::uint32_t>(t.dims.size()));
      for (auto d : t.dims) detail::write_u32(f, d);
      for (float v : t.data) detail::write_f32(f, v);
    }
  } catch (...) {
    std::fclose(f);
    throw;
  }
  std::fclose(f);
}

inline std::vector<Tensor> read_weights(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("cannot open weight file '" + path + "'");
  std::vector<Tensor> tensors;
  try {
    const std::uint32_t count = detail::read_u32(f, path);
    if (count > 4096) throw IoError(path + ": implausible tensor count");
    tensors.resize(count);
    for (auto& t : tensors) {
      const std::uint32_t ndim = detail::read_u32(f, path);
      if (ndim == 0 || ndim > 8) throw IoError(path + ": bad tensor rank");
      t.dims.resize(ndim);
      std::size_t n = 1;
      for (auto& d : t.dims) {
        d = detail::read_u32(f, path);
        if (d == 0 || d > (1u << 24)) throw IoError(path + ": bad tensor dimension");
        n *= d;
      }
      if (n > (1ull << 28)) throw IoError(path + ": tensor too large");
      t.data.resize(n);
      for (auto& v : t.data) v = detail::read_f32(f, path);
    }
  } catch (...) {
    std::fclose(f);
    throw;
  }
  std::fclose(f);
  return tensors;
}

}  // namespace masa
