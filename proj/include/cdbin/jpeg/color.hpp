#pragma once

#include "cdbin/image.hpp"

namespace cdbin::jpeg {

/// Per-pixel BT.601 full-range transform, rounded to nearest and clamped to [0,255].
/// Rejects 1-component input.
PixelImage rgbToYcbcr(const PixelImage& img);

/// Inverse transform; recovers RGB within +/-1 per channel.
PixelImage ycbcrToRgb(const PixelImage& img);

} // namespace cdbin::jpeg
