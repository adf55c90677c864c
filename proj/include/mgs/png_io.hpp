// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "mgs/image.hpp"

namespace mgs {

// 8-bit PNG I/O. Byte values map linearly to [0, 1]; no gamma transform is
// applied. Alpha is dropped on read; gray is expanded to RGB.
Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);

// Linear quantization used by write_png: round(clamp(v, 0, 1) * 255).
std::uint8_t quantize_channel(double v) noexcept;

}  // namespace mgs
