#include "cdbin/jpeg/blocks.hpp"

namespace cdbin::jpeg {

const std::array<std::uint8_t, kBlockSize> kZigzagToNatural = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

const std::array<std::uint8_t, kBlockSize> kNaturalToZigzag = [] {
    std::array<std::uint8_t, kBlockSize> inv{};
    for (int z = 0; z < kBlockSize; ++z) inv[kZigzagToNatural[z]] = static_cast<std::uint8_t>(z);
    return inv;
}();

std::vector<DctBlock> splitBlocks(const std::uint8_t* plane, int width, int height) {
    if (width <= 0 || height <= 0 || width % kBlockSide != 0 || height % kBlockSide != 0)
        throw Error("splitBlocks: dimensions must be positive multiples of 8, got " +
                    std::to_string(width) + "x" + std::to_string(height));

    const int bw = width / kBlockSide;
    const int bh = height / kBlockSide;
    std::vector<DctBlock> blocks(static_cast<std::size_t>(bw) * bh);
    for (int br = 0; br < bh; ++br)
        for (int bc = 0; bc < bw; ++bc) {
            DctBlock& b = blocks[br * bw + bc];
            for (int y = 0; y < kBlockSide; ++y)
                for (int x = 0; x < kBlockSide; ++x)
                    b[y * kBlockSide + x] =
                        static_cast<double>(plane[(br * kBlockSide + y) * width + bc * kBlockSide + x]) - 128.0;
        }
    return blocks;
}

CoeffBlock zigzagScan(const CoeffBlock& block) {
    CoeffBlock seq;
    for (int z = 0; z < kBlockSize; ++z) seq[z] = block[kZigzagToNatural[z]];
    return seq;
}

CoeffBlock inverseZigzag(const CoeffBlock& sequence) {
    CoeffBlock block;
    for (int z = 0; z < kBlockSize; ++z) block[kZigzagToNatural[z]] = sequence[z];
    return block;
}

} // namespace cdbin::jpeg
