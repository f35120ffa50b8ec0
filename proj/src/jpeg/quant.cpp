#include "cdbin/jpeg/quant.hpp"

#include <cmath>

namespace cdbin::jpeg {

namespace {

// Annex-K standard tables, natural row-major order.
constexpr std::array<std::uint16_t, kBlockSize> kStdLuminance = {
    16, 11, 10, 16, 24,  40,  51,  61,  //
    12, 12, 14, 19, 26,  58,  60,  55,  //
    14, 13, 16, 24, 40,  57,  69,  56,  //
    14, 17, 22, 29, 51,  87,  80,  62,  //
    18, 22, 37, 56, 68,  109, 103, 77,  //
    24, 35, 55, 64, 81,  104, 113, 92,  //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99};

constexpr std::array<std::uint16_t, kBlockSize> kStdChrominance = {
    17, 18, 24, 47, 99, 99, 99, 99, //
    18, 21, 26, 66, 99, 99, 99, 99, //
    24, 26, 56, 99, 99, 99, 99, 99, //
    47, 66, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99};

} // namespace

QuantTable scaleQuantTable(TableKind kind, int quality) {
    if (quality < 1 || quality > 100)
        throw Error("quality must be in [1,100], got " + std::to_string(quality));

    const auto& base = (kind == TableKind::Luminance) ? kStdLuminance : kStdChrominance;
    const int scale = (quality < 50) ? 5000 / quality : 200 - 2 * quality;

    QuantTable t;
    t.kind = kind;
    t.quality = quality;
    for (int z = 0; z < kBlockSize; ++z) {
        int v = (base[kZigzagToNatural[z]] * scale + 50) / 100;
        if (v < 1) v = 1;
        if (v > 255) v = 255;
        t.zigzag[z] = static_cast<std::uint16_t>(v);
    }
    return t;
}

CoeffBlock quantizeBlock(const DctBlock& coeffs, const QuantTable& table) {
    CoeffBlock out;
    for (int i = 0; i < kBlockSize; ++i)
        out[i] = static_cast<std::int16_t>(std::lround(coeffs[i] / table.natural(i)));
    return out;
}

DctBlock dequantizeBlock(const CoeffBlock& block, const QuantTable& table) {
    DctBlock out;
    for (int i = 0; i < kBlockSize; ++i)
        out[i] = static_cast<double>(block[i]) * table.natural(i);
    return out;
}

} // namespace cdbin::jpeg
