// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "mgs/optim.hpp"
#include "mgs/splat.hpp"

namespace mgs {

// Binary model checkpoint, little-endian:
//   "MGS1", version u32, width u32, height u32, N u64, background 3 x f32,
//   criterion tag u8, then N records of
//   (id u64, mu 2 x f64, log_scale 2 x f64, theta f64, opacity_raw f64,
//    color_raw 3 x f64, depth f64)
// in storage (importance) order.
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderBytes = 4 + 4 + 4 + 4 + 8 + 12 + 1;
inline constexpr std::size_t kCheckpointRecordBytes = 8 + 16 + 16 + 8 + 8 + 24 + 8;

void write_checkpoint(std::ostream& out, const SplatModel& model);
void write_checkpoint(const std::filesystem::path& path, const SplatModel& model);

// Throws kParse on malformed data, kIo when the file cannot be opened.
SplatModel read_checkpoint(std::istream& in);
SplatModel read_checkpoint(const std::filesystem::path& path);

}  // namespace mgs
