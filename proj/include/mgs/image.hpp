// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mgs {

// Row-major, channel-interleaved RGB image of doubles. Also used for
// image-shaped gradients, whose values are unconstrained.
class Image {
 public:
  static constexpr std::size_t kChannels = 3;

  Image() = default;
  Image(std::uint32_t width, std::uint32_t height, double fill = 0.0)
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * height * kChannels, fill) {}

  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
  std::size_t value_count() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& at(std::uint32_t x, std::uint32_t y, std::size_t c) noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }
  double at(std::uint32_t x, std::uint32_t y, std::size_t c) const noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<double> data_;
};

// Throws kInvalidInput when shapes differ.
void require_same_shape(const Image& a, const Image& b, const char* what);

}  // namespace mgs
