#pragma once

#include "cdbin/jpeg/blocks.hpp"

namespace cdbin::jpeg {

/// Forward 2-D DCT-II with JPEG normalization: C(0)=1/sqrt(2), overall 1/4.
/// Separable double-precision implementation, no integer approximations.
DctBlock fdct8x8(const DctBlock& block);

/// Inverse (DCT-III); idct8x8(fdct8x8(b)) == b up to floating-point error.
DctBlock idct8x8(const DctBlock& coeffs);

/// The 64x64 synthesis matrix of idct8x8: row k holds the spatial 8x8 pattern
/// (row-major) of a unit coefficient at zig-zag position k. Shared with the
/// network's fixed reconstruction stage.
const std::array<std::array<double, kBlockSize>, kBlockSize>& idctBasisZigzag();

} // namespace cdbin::jpeg
