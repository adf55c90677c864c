// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "mgs/image.hpp"

namespace mgs {

// Seeded procedural test image: a smooth gradient backdrop with ellipses,
// boxes, stripes and fine noise. Values lie in [0, 1].
Image reference_image(std::uint32_t width = 128, std::uint32_t height = 128, std::uint64_t seed = 7);

}  // namespace mgs
