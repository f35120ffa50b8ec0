#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cdbin/image.hpp"

namespace cdbin::jpeg {

inline constexpr int kBlockSide = 8;
inline constexpr int kBlockSize = 64;

/// Real-valued 8x8 block: level-shifted samples or DCT coefficients.
using DctBlock = std::array<double, kBlockSize>;

/// Quantized 8x8 coefficient block in natural (row-major) order.
using CoeffBlock = std::array<std::int16_t, kBlockSize>;

/// Natural (row-major) index visited at each zig-zag position.
extern const std::array<std::uint8_t, kBlockSize> kZigzagToNatural;
/// Zig-zag position of each natural index; inverse permutation of the above.
extern const std::array<std::uint8_t, kBlockSize> kNaturalToZigzag;

/// Splits a sample plane into row-major 8x8 blocks, level-shifting by -128.
/// Dimensions must be multiples of 8.
std::vector<DctBlock> splitBlocks(const std::uint8_t* plane, int width, int height);

/// Reorders a natural-order block into the zig-zag sequence.
CoeffBlock zigzagScan(const CoeffBlock& block);

/// Restores a natural-order block from a zig-zag sequence.
CoeffBlock inverseZigzag(const CoeffBlock& sequence);

} // namespace cdbin::jpeg
