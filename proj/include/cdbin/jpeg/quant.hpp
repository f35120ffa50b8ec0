#pragma once

#include "cdbin/jpeg/blocks.hpp"

namespace cdbin::jpeg {

enum class TableKind { Luminance, Chrominance };

/// 64 quantization divisors, stored in zig-zag (DQT wire) order.
struct QuantTable {
    std::array<std::uint16_t, kBlockSize> zigzag{};
    int quality = 0; // 0 when read back from a stream
    TableKind kind = TableKind::Luminance;

    std::uint16_t natural(int naturalIdx) const {
        return zigzag[kNaturalToZigzag[naturalIdx]];
    }

    /// Tables are equal when they quantize identically; quality and kind are
    /// provenance labels a parsed stream cannot recover.
    bool operator==(const QuantTable& o) const { return zigzag == o.zigzag; }
};

/// Annex-K standard table scaled with the IJG quality formula:
/// scale = 5000/q for q < 50 else 200 - 2q; entry' = clamp((entry*scale+50)/100, 1, 255).
/// quality must be in [1,100]; quality 50 reproduces the unscaled table.
QuantTable scaleQuantTable(TableKind kind, int quality);

/// Entry-wise round(c/q), half away from zero.
CoeffBlock quantizeBlock(const DctBlock& coeffs, const QuantTable& table);

/// Entry-wise product; exact inverse when every coefficient divides its divisor.
DctBlock dequantizeBlock(const CoeffBlock& block, const QuantTable& table);

} // namespace cdbin::jpeg
