#pragma once

#include "fruitsize/mask.hpp"

#include <string>

namespace fruitsize {

/// Run-length code for a binary mask over a width x height image.
///
/// Space-separated counts in row-major order, alternating background and
/// foreground and always starting with background (possibly 0). Counts sum
/// to width * height.
std::string encode_rle(const FruitMask& mask, int width, int height);

/// Throws Error(SchemaError) on malformed text, wrong total, or an empty mask.
FruitMask decode_rle(const std::string& text, int width, int height);

}  // namespace fruitsize
