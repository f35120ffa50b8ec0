#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cdbin/jpeg/blocks.hpp"

namespace cdbin::jpeg {

class DecodeError : public Error {
public:
    using Error::Error;
};

/// (run of preceding zeros, value). (0,0) is EOB, (15,0) is ZRL.
struct RleSymbol {
    std::uint8_t run = 0;
    std::int16_t value = 0;
    bool operator==(const RleSymbol&) const = default;
};

/// JPEG AC run-length coding over the 63 AC coefficients in zig-zag order.
/// Runs longer than 15 emit ZRL; trailing zeros collapse to EOB; a block
/// ending in a nonzero coefficient has no EOB.
std::vector<RleSymbol> rleEncodeAc(std::span<const std::int16_t> ac);

/// Inverse of rleEncodeAc; writes exactly 63 coefficients.
/// Throws DecodeError on overrun or malformed symbols.
void rleDecodeAc(std::span<const RleSymbol> symbols, std::span<std::int16_t> ac);

/// d[0] = dc[0], d[i] = dc[i] - dc[i-1]. Rejects empty input.
std::vector<int> dpcmEncode(std::span<const int> dcs);

/// Prefix-sum inverse of dpcmEncode.
std::vector<int> dpcmDecode(std::span<const int> diffs);

enum class HuffClass { Dc, Ac };

/// Canonical Huffman table: JPEG bit-length counts plus symbol values,
/// with derived encode and decode structures.
struct HuffTable {
    HuffClass cls = HuffClass::Dc;
    int id = 0;
    std::array<std::uint8_t, 16> counts{};
    std::vector<std::uint8_t> symbols;

    struct Code {
        std::uint16_t code = 0;
        std::uint8_t bits = 0;
    };
    std::array<Code, 256> encode{};

    // Canonical decode tables indexed by code length 1..16.
    std::array<std::int32_t, 17> minCode{};
    std::array<std::int32_t, 17> maxCode{}; // -1 where no codes of that length
    std::array<int, 17> valPtr{};

    /// Builds canonical codes per the T.81 assignment and validates the
    /// table (<= 256 symbols, no all-ones code of length 16).
    static HuffTable build(HuffClass cls, int id, const std::array<std::uint8_t, 16>& counts,
                           std::vector<std::uint8_t> symbols);
};

/// JPEG-standard default tables (Annex-K style).
const HuffTable& defaultHuffTable(HuffClass cls, bool chroma);

/// Magnitude category of a coefficient value: 0 for 0, else bit length of |v|.
int magnitudeCategory(int value);

/// Accumulates codes MSB-first and applies 0xFF byte stuffing.
class BitWriter {
public:
    explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}
    void put(std::uint32_t code, int bits);
    void putValueBits(int value, int category);
    /// Pads the final partial byte with 1-bits.
    void flush();

private:
    std::vector<std::uint8_t>& out_;
    std::uint32_t acc_ = 0;
    int n_ = 0;
};

/// Reads entropy-coded bits, removing byte stuffing and stopping at markers.
class BitReader {
public:
    explicit BitReader(std::span<const std::uint8_t> data) : data_(data) {}

    int readBit();                 // throws DecodeError past the end of entropy data
    int readBits(int n);
    int receiveExtend(int category);
    int decodeSymbol(const HuffTable& table);

    /// Consumes an expected RSTn marker at a byte boundary; returns its index 0..7.
    int consumeRestart();
    /// Byte offset just past the last consumed entropy byte (marker scan resume point).
    std::size_t consumedBytes() const { return pos_; }

private:
    int nextDataByte();
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    std::uint32_t acc_ = 0;
    int n_ = 0;
    bool atMarker_ = false;
};

} // namespace cdbin::jpeg
