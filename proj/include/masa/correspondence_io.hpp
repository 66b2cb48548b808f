// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "masa/common.hpp"
#include "masa/matching.hpp"
#include "masa/weights_io.hpp"

namespace masa {

// Binary correspondence format, little-endian:
//   "MASA"  u16 version=1  u16 flags=0
//   u32 x12: K, grid_rows, grid_cols, block_h, block_w, padded_h, padded_w,
//            orig_h, orig_w, patch, m_h, m_w
//   per block: u32 anchor_y, anchor_x, side_y, side_x,
//              u32 index[m_h*m_w], f32 score[m_h*m_w]

inline constexpr std::uint16_t kCorrespondenceVersion = 1;

namespace detail {

inline void write_u16(std::FILE* f, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  if (std::fwrite(b, 1, 2, f) != 2) throw IoError("correspondence file: short write");
}

inline std::uint16_t read_u16(std::FILE* f, const std::string& path) {
  unsigned char b[2];
  if (std::fread(b, 1, 2, f) != 2) throw IoError(path + ": truncated correspondence file");
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

}  // namespace detail

inline void write_correspondence(const CorrespondenceField& field, const std::string& path) {
  field.validate();
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  try {
    if (std::fwrite("MASA", 1, 4, f) != 4) throw IoError("correspondence file: short write");
    detail::write_u16(f, kCorrespondenceVersion);
    detail::write_u16(f, 0);
    const BlockPartition& part = field.partition;
    const std::uint32_t header[12] = {
        static_cast<std::uint32_t>(part.block_count()),
        static_cast<std::uint32_t>(part.grid_rows),
        static_cast<std::uint32_t>(part.grid_cols),
        static_cast<std::uint32_t>(part.block_h),
        static_cast<std::uint32_t>(part.block_w),
        static_cast<std::uint32_t>(part.padded_h),
        static_cast<std::uint32_t>(part.padded_w),
        static_cast<std::uint32_t>(part.orig_h),
        static_cast<std::uint32_t>(part.orig_w),
        static_cast<std::uint32_t>(field.patch),
        static_cast<std::uint32_t>(field.m_h),
        static_cast<std::uint32_t>(field.m_w)};
    for (std::uint32_t v : header) detail::write_u32(f, v);
    const std::size_t per = field.per_block();
    for (int k = 0; k < part.block_count(); ++k) {
      const BlockMatch& m = field.blocks[k];
      detail::write_u32(f, static_cast<std::uint32_t>(m.anchor_y));
      detail::write_u32(f, static_cast<std::uint32_t>(m.anchor_x));
      detail::write_u32(f, static_cast<std::uint32_t>(m.side_y));
      detail::write_u32(f, static_cast<std::uint32_t>(m.side_x));
      for (std::size_t i = 0; i < per; ++i) detail::write_u32(f, field.index[k * per + i]);
      for (std::size_t i = 0; i < per; ++i) detail::write_f32(f, field.score[k * per + i]);
    }
  } catch (...) {
    std::fclose(f);
    throw;
  }
  if (std::fclose(f) != 0) throw IoError("cannot finish writing '" + path + "'");
}

inline CorrespondenceField read_correspondence(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("cannot open correspondence file '" + path + "'");
  CorrespondenceField field;
  try {
    char magic[4];
    if (std::fread(magic, 1, 4, f) != 4 || std::string(magic, 4) != "MASA")
      throw IoError(path + ": not a correspondence file");
    const std::uint16_t version = detail::read_u16(f, path);
    if (version != kCorrespondenceVersion)
      throw IoError(path + ": unsupported correspondence version");
    detail::read_u16(f, path);  // flags, reserved
    std::uint32_t header[12];
    for (auto& v : header) v = detail::read_u32(f, path);
    BlockPartition& part = field.partition;
    part.grid_rows = static_cast<int>(header[1]);
    part.grid_cols = static_cast<int>(header[2]);
    part.block_h = static_cast<int>(header[3]);
    part.block_w = static_cast<int>(header[4]);
    part.padded_h = static_cast<int>(header[5]);
    part.padded_w = static_cast<int>(header[6]);
    part.orig_h = static_cast<int>(header[7]);
    part.orig_w = static_cast<int>(header[8]);
    field.patch = static_cast<int>(header[9]);
    field.m_h = static_cast<int>(header[10]);
    field.m_w = static_cast<int>(header[11]);
    if (header[0] != static_cast<std::uint32_t>(part.block_count()) ||
        header[0] > (1u << 24))
      throw IoError(path + ": inconsistent block count");
    const std::size_t per = field.per_block();
    field.blocks.resize(part.block_count());
    field.index.resize(per * part.block_count());
    field.score.resize(per * part.block_count());
    for (int k = 0; k < part.block_count(); ++k) {
      BlockMatch& m = field.blocks[k];
      m.anchor_y = static_cast<int>(detail::read_u32(f, path));
      m.anchor_x = static_cast<int>(detail::read_u32(f, path));
      m.side_y = static_cast<int>(detail::read_u32(f, path));
      m.side_x = static_cast<int>(detail::read_u32(f, path));
      m.center_y = m.anchor_y + (m.side_y - 1) / 2;
      m.center_x = m.anchor_x + (m.side_x - 1) / 2;
      for (std::size_t i = 0; i < per; ++i) field.index[k * per + i] = detail::read_u32(f, path);
      for (std::size_t i = 0; i < per; ++i) field.score[k * per + i] = detail::read_f32(f, path);
    }
  } catch (...) {
    std::fclose(f);
    throw;
  }
  std::fclose(f);
  field.validate();
  return field;
}

/// Text dump: one "k i j score" line per patch entry, scores with 8 decimal
/// digits.
inline void dump_correspondence_text(const CorrespondenceField& field, std::FILE* out) {
  const std::size_t per = field.per_block();
  for (int k = 0; k < field.partition.block_count(); ++k)
    for (std::size_t i = 0; i < per; ++i)
      std::fprintf(out, "%d %zu %u %.8f\n", k, i, field.index[k * per + i],
                   static_cast<double>(field.score[k * per + i]));
}

}  // namespace masa
