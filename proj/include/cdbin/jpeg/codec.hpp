#pragma once

#include <string>

#include "cdbin/jpeg/blocks.hpp"
#include "cdbin/jpeg/entropy.hpp"
#include "cdbin/jpeg/quant.hpp"

namespace cdbin::jpeg {

/// A baseline JFIF byte stream.
struct JpegStream {
    std::vector<std::uint8_t> bytes;
    bool operator==(const JpegStream&) const = default;
};

/// Quantized DCT coefficients of one image component as an 8x8-block grid.
/// Exposes both the block-grid view and the flat coefficient-plane view.
struct CoefficientTensor {
    int blocksHigh = 0;
    int blocksWide = 0;
    int componentId = 0; // id byte from the stream (1=Y, 2=Cb, 3=Cr)
    std::vector<CoeffBlock> blocks; // row-major grid, natural-order entries
    QuantTable table;

    int planeHeight() const { return blocksHigh * kBlockSide; }
    int planeWidth() const { return blocksWide * kBlockSide; }

    const CoeffBlock& block(int row, int col) const { return blocks[row * blocksWide + col]; }
    CoeffBlock& block(int row, int col) { return blocks[row * blocksWide + col]; }

    /// Coefficient-plane view: entry (y,x) of the planeHeight x planeWidth grid.
    std::int16_t planeAt(int y, int x) const {
        return block(y / kBlockSide, x / kBlockSide)[(y % kBlockSide) * kBlockSide + x % kBlockSide];
    }

    bool operator==(const CoefficientTensor&) const = default;
};

/// Result of partial decoding: coefficients exactly as entropy-coded, the
/// pre-padding image dimensions from SOF, and the quantization tables.
struct DecodedCoefficients {
    int width = 0;
    int height = 0;
    std::vector<CoefficientTensor> components;

    bool operator==(const DecodedCoefficients&) const = default;
};

/// Encodes to a baseline JFIF stream. Dimensions must be multiples of 8.
/// Grayscale images use one component; RGB uses YCbCr 4:4:4.
JpegStream encodeImage(const PixelImage& img, int quality);

/// The analysis half of encodeImage: color transform, block split, DCT,
/// quantization. partialDecode(encodeImage(x,q)) equals this bit-exactly.
DecodedCoefficients imageToCoefficients(const PixelImage& img, int quality);

/// Serializes already-quantized coefficients to a baseline JFIF stream with
/// the standard default Huffman tables.
JpegStream encodeCoefficients(const DecodedCoefficients& coeffs);

/// Entropy-decodes a baseline stream down to quantized coefficients; no
/// dequantization, no inverse transform.
DecodedCoefficients partialDecode(const JpegStream& stream);

/// Full decode: partial decode, dequantize, IDCT, level-unshift, clamp,
/// and YCbCr->RGB for 3-component streams.
PixelImage decodeImage(const JpegStream& stream);

/// raw/stream; rejects zero stream size.
double compressionRatio(std::size_t rawBytes, std::size_t streamBytes);

/// Plain-text coefficient dump, one block per line:
///   component blockRow blockCol v0 .. v63   (natural row-major order)
/// '#' lines carry grid dimensions and quantization tables as metadata.
std::string writeCoeffDump(const DecodedCoefficients& coeffs);

/// Parses a dump back; metadata lines are honored, unknown '#' lines skipped.
DecodedCoefficients parseCoeffDump(const std::string& text);

} // namespace cdbin::jpeg
