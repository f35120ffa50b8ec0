#include "cdbin/jpeg/dct.hpp"

#include <cmath>

namespace cdbin::jpeg {

namespace {

// cosines[u][x] = C(u)/2 * cos((2x+1) u pi / 16)
const auto kCos = [] {
    std::array<std::array<double, kBlockSide>, kBlockSide> m{};
    const double pi = std::acos(-1.0);
    for (int u = 0; u < kBlockSide; ++u) {
        const double cu = (u == 0) ? 1.0 / std::sqrt(2.0) : 1.0;
        for (int x = 0; x < kBlockSide; ++x)
            m[u][x] = 0.5 * cu * std::cos((2 * x + 1) * u * pi / 16.0);
    }
    return m;
}();

} // namespace

DctBlock fdct8x8(const DctBlock& block) {
    // Rows first, then columns; composes to the 2-D C(u)C(v)/4 normalization.
    std::array<std::array<double, kBlockSide>, kBlockSide> tmp{};
    for (int y = 0; y < kBlockSide; ++y)
        for (int u = 0; u < kBlockSide; ++u) {
            double s = 0.0;
            for (int x = 0; x < kBlockSide; ++x) s += block[y * kBlockSide + x] * kCos[u][x];
            tmp[y][u] = s;
        }
    DctBlock out{};
    for (int v = 0; v < kBlockSide; ++v)
        for (int u = 0; u < kBlockSide; ++u) {
            double s = 0.0;
            for (int y = 0; y < kBlockSide; ++y) s += tmp[y][u] * kCos[v][y];
            out[v * kBlockSide + u] = s;
        }
    return out;
}

DctBlock idct8x8(const DctBlock& coeffs) {
    std::array<std::array<double, kBlockSide>, kBlockSide> tmp{};
    for (int v = 0; v < kBlockSide; ++v)
        for (int x = 0; x < kBlockSide; ++x) {
            double s = 0.0;
            for (int u = 0; u < kBlockSide; ++u) s += coeffs[v * kBlockSide + u] * kCos[u][x];
            tmp[v][x] = s;
        }
    DctBlock out{};
    for (int y = 0; y < kBlockSide; ++y)
        for (int x = 0; x < kBlockSide; ++x) {
            double s = 0.0;
            for (int v = 0; v < kBlockSide; ++v) s += tmp[v][x] * kCos[v][y];
            out[y * kBlockSide + x] = s;
        }
    return out;
}

const std::array<std::array<double, kBlockSize>, kBlockSize>& idctBasisZigzag() {
    static const auto basis = [] {
        std::array<std::array<double, kBlockSize>, kBlockSize> b{};
        for (int z = 0; z < kBlockSize; ++z) {
            DctBlock unit{};
            unit[kZigzagToNatural[z]] = 1.0;
            b[z] = idct8x8(unit);
        }
        return b;
    }();
    return basis;
}

} // namespace cdbin::jpeg
