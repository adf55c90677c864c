// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include "mgs/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "mgs/errors.hpp"

namespace mgs {

std::uint8_t quantize_channel(double v) noexcept {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

Image read_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    fail(ErrorCode::kIo, "cannot read PNG " + path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    fail(ErrorCode::kIo, "cannot decode PNG " + path.string() + ": " + message);
  }
  Image image(png.width, png.height);
  auto values = image.values();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = buffer[i] / 255.0;
  return image;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  if (image.empty()) fail(ErrorCode::kInvalidInput, "cannot write an empty image");
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = image.width();
  png.height = image.height();
  png.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buffer(image.value_count());
  const auto values = image.values();
  for (std::size_t i = 0; i < values.size(); ++i) buffer[i] = quantize_channel(values[i]);
  if (!png_image_write_to_file(&png, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    fail(ErrorCode::kIo, "cannot write PNG " + path.string() + ": " + png.message);
  }
}

}  // namespace mgs
