#include "cdbin/jpeg/codec.hpp"
#include "cdbin/jpeg/color.hpp"
#include "cdbin/jpeg/dct.hpp"

namespace cdbin::jpeg {

namespace {

void putU16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

void putMarker(std::vector<std::uint8_t>& out, std::uint8_t id, std::uint16_t length) {
    out.push_back(0xFF);
    out.push_back(id);
    putU16(out, length);
}

void putHuffTable(std::vector<std::uint8_t>& out, const HuffTable& t) {
    out.push_back(static_cast<std::uint8_t>(((t.cls == HuffClass::Ac) << 4) | t.id));
    for (auto c : t.counts) out.push_back(c);
    for (auto s : t.symbols) out.push_back(s);
}

void encodeBlock(BitWriter& bits, const CoeffBlock& block, int& dcPred, const HuffTable& dc,
                 const HuffTable& ac) {
    const CoeffBlock zz = zigzagScan(block);

    const int diff = zz[0] - dcPred;
    dcPred = zz[0];
    const int dcCat = magnitudeCategory(diff);
    if (dcCat > 11) throw Error("DC difference out of baseline range");
    const auto& dcCode = dc.encode[dcCat];
    bits.put(dcCode.code, dcCode.bits);
    bits.putValueBits(diff, dcCat);

    for (const RleSymbol& s : rleEncodeAc(std::span<const std::int16_t>(zz).subspan(1))) {
        const int cat = magnitudeCategory(s.value);
        if (cat > 10) throw Error("AC coefficient out of baseline range");
        const auto& code = ac.encode[(s.run << 4) | cat];
        if (code.bits == 0) throw Error("AC symbol missing from Huffman table");
        bits.put(code.code, code.bits);
        bits.putValueBits(s.value, cat);
    }
}

} // namespace

JpegStream encodeCoefficients(const DecodedCoefficients& coeffs) {
    const int nc = static_cast<int>(coeffs.components.size());
    if (nc != 1 && nc != 3) throw Error("encodeCoefficients: 1 or 3 components required");
    const CoefficientTensor& first = coeffs.components[0];
    if (first.blocks.empty()) throw Error("encodeCoefficients: empty coefficient tensor");
    for (const auto& c : coeffs.components) {
        if (c.blocksHigh != first.blocksHigh || c.blocksWide != first.blocksWide)
            throw Error("encodeCoefficients: component grids must match (4:4:4)");
        if (static_cast<int>(c.blocks.size()) != c.blocksHigh * c.blocksWide)
            throw Error("encodeCoefficients: block count mismatch");
    }
    if (coeffs.width <= 0 || coeffs.height <= 0 ||
        (coeffs.width + kBlockSide - 1) / kBlockSide != first.blocksWide ||
        (coeffs.height + kBlockSide - 1) / kBlockSide != first.blocksHigh)
        throw Error("encodeCoefficients: image dimensions do not match block grid");

    JpegStream stream;
    auto& out = stream.bytes;

    // SOI + JFIF APP0
    out.push_back(0xFF);
    out.push_back(0xD8);
    putMarker(out, 0xE0, 16);
    const char jfif[5] = {'J', 'F', 'I', 'F', '\0'};
    for (char ch : jfif) out.push_back(static_cast<std::uint8_t>(ch));
    out.push_back(1); // version 1.1
    out.push_back(1);
    out.push_back(0); // aspect-ratio density units
    putU16(out, 1);
    putU16(out, 1);
    out.push_back(0); // no thumbnail
    out.push_back(0);

    // DQT: table 0 from component 0, table 1 (color) from component 1
    const int tableCount = nc == 1 ? 1 : 2;
    putMarker(out, 0xDB, static_cast<std::uint16_t>(2 + tableCount * 65));
    for (int t = 0; t < tableCount; ++t) {
        out.push_back(static_cast<std::uint8_t>(t)); // 8-bit precision, id t
        const QuantTable& q = coeffs.components[t].table;
        for (int z = 0; z < kBlockSize; ++z) {
            if (q.zigzag[z] < 1 || q.zigzag[z] > 255)
                throw Error("quantization entries must be in [1,255]");
            out.push_back(static_cast<std::uint8_t>(q.zigzag[z]));
        }
    }
    if (nc == 3 && !(coeffs.components[1].table == coeffs.components[2].table))
        throw Error("encodeCoefficients: chroma components must share one table");

    // SOF0, all components 1x1 (4:4:4)
    putMarker(out, 0xC0, static_cast<std::uint16_t>(8 + 3 * nc));
    out.push_back(8);
    putU16(out, static_cast<std::uint16_t>(coeffs.height));
    putU16(out, static_cast<std::uint16_t>(coeffs.width));
    out.push_back(static_cast<std::uint8_t>(nc));
    for (int c = 0; c < nc; ++c) {
        out.push_back(static_cast<std::uint8_t>(c + 1));
        out.push_back(0x11);
        out.push_back(c == 0 ? 0 : 1);
    }

    // DHT with the standard default tables
    const HuffTable* tables[4] = {&defaultHuffTable(HuffClass::Dc, false),
                                  &defaultHuffTable(HuffClass::Ac, false),
                                  &defaultHuffTable(HuffClass::Dc, true),
                                  &defaultHuffTable(HuffClass::Ac, true)};
    const int huffCount = nc == 1 ? 2 : 4;
    std::uint16_t dhtLen = 2;
    for (int i = 0; i < huffCount; ++i)
        dhtLen = static_cast<std::uint16_t>(dhtLen + 1 + 16 + tables[i]->symbols.size());
    putMarker(out, 0xC4, dhtLen);
    for (int i = 0; i < huffCount; ++i) putHuffTable(out, *tables[i]);

    // SOS
    putMarker(out, 0xDA, static_cast<std::uint16_t>(6 + 2 * nc));
    out.push_back(static_cast<std::uint8_t>(nc));
    for (int c = 0; c < nc; ++c) {
        out.push_back(static_cast<std::uint8_t>(c + 1));
        out.push_back(c == 0 ? 0x00 : 0x11);
    }
    out.push_back(0);
    out.push_back(63);
    out.push_back(0);

    // Entropy-coded data: interleaved MCUs, one block per component (1x1 sampling)
    BitWriter bits(out);
    std::vector<int> dcPred(nc, 0);
    for (int br = 0; br < first.blocksHigh; ++br)
        for (int bc = 0; bc < first.blocksWide; ++bc)
            for (int c = 0; c < nc; ++c)
                encodeBlock(bits, coeffs.components[c].block(br, bc), dcPred[c],
                            defaultHuffTable(HuffClass::Dc, c != 0),
                            defaultHuffTable(HuffClass::Ac, c != 0));
    bits.flush();

    out.push_back(0xFF);
    out.push_back(0xD9);
    return stream;
}

DecodedCoefficients imageToCoefficients(const PixelImage& img, int quality) {
    if (img.width % kBlockSide != 0 || img.height % kBlockSide != 0)
        throw Error("encodeImage: dimensions must be multiples of 8");

    const PixelImage* src = &img;
    PixelImage ycbcr;
    if (img.components == 3) {
        ycbcr = rgbToYcbcr(img);
        src = &ycbcr;
    }

    DecodedCoefficients coeffs;
    coeffs.width = img.width;
    coeffs.height = img.height;
    for (int c = 0; c < src->components; ++c) {
        CoefficientTensor t;
        t.componentId = c + 1;
        t.blocksHigh = img.height / kBlockSide;
        t.blocksWide = img.width / kBlockSide;
        t.table = scaleQuantTable(c == 0 ? TableKind::Luminance : TableKind::Chrominance, quality);
        t.blocks.reserve(static_cast<std::size_t>(t.blocksHigh) * t.blocksWide);
        for (const DctBlock& b : splitBlocks(src->plane(c), img.width, img.height))
            t.blocks.push_back(quantizeBlock(fdct8x8(b), t.table));
        coeffs.components.push_back(std::move(t));
    }
    return coeffs;
}

JpegStream encodeImage(const PixelImage& img, int quality) {
    return encodeCoefficients(imageToCoefficients(img, quality));
}

double compressionRatio(std::size_t rawBytes, std::size_t streamBytes) {
    if (rawBytes == 0) throw Error("compressionRatio: raw size must be positive");
    if (streamBytes == 0) throw Error("compressionRatio: stream size must be positive");
    return static_cast<double>(rawBytes) / static_cast<double>(streamBytes);
}

} // namespace cdbin::jpeg
