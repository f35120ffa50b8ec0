#include <cmath>
#include <map>
#include <optional>

#include "cdbin/jpeg/codec.hpp"
#include "cdbin/jpeg/color.hpp"
#include "cdbin/jpeg/dct.hpp"

namespace cdbin::jpeg {

namespace {

struct FrameComponent {
    int id = 0;
    int hSamp = 1, vSamp = 1;
    int quantId = 0;
    int dcTableId = 0, acTableId = 0;
};

class StreamParser {
public:
    explicit StreamParser(std::span<const std::uint8_t> data) : data_(data) {}

    DecodedCoefficients run() {
        expectSoi();
        parseSegmentsUntilSos();
        decodeScan();
        expectEoi();
        return std::move(result_);
    }

private:
    std::uint8_t byteAt(std::size_t i) const {
        if (i >= data_.size()) throw DecodeError("truncated stream");
        return data_[i];
    }

    std::uint16_t u16At(std::size_t i) const {
        return static_cast<std::uint16_t>((byteAt(i) << 8) | byteAt(i + 1));
    }

    void expectSoi() {
        if (data_.size() < 2 || data_[0] != 0xFF || data_[1] != 0xD8)
            throw DecodeError("not a JPEG stream: missing SOI");
        pos_ = 2;
    }

    void parseSegmentsUntilSos() {
        while (true) {
            while (byteAt(pos_) == 0xFF && byteAt(pos_ + 1) == 0xFF) ++pos_; // fill bytes
            if (byteAt(pos_) != 0xFF) throw DecodeError("expected marker");
            const std::uint8_t marker = byteAt(pos_ + 1);
            pos_ += 2;
            switch (marker) {
            case 0xC0:
            case 0xC1:
                parseSof();
                break;
            case 0xC2:
                throw DecodeError("progressive JPEG (SOF2) not supported");
            case 0xC3:
            case 0xC5:
            case 0xC6:
            case 0xC7:
            case 0xC9:
            case 0xCA:
            case 0xCB:
            case 0xCD:
            case 0xCE:
            case 0xCF:
                throw DecodeError("unsupported SOF marker");
            case 0xC4:
                parseDht();
                break;
            case 0xDB:
                parseDqt();
                break;
            case 0xDD:
                parseDri();
                break;
            case 0xDA:
                parseSosHeader();
                return;
            case 0xD9:
                throw DecodeError("EOI before scan data");
            default:
                if ((marker >= 0xE0 && marker <= 0xEF) || marker == 0xFE) {
                    skipSegment();
                } else {
                    throw DecodeError("unexpected marker in header");
                }
            }
        }
    }

    void skipSegment() { pos_ += u16At(pos_); }

    void parseDqt() {
        const std::size_t end = pos_ + u16At(pos_);
        pos_ += 2;
        while (pos_ < end) {
            const int pqTq = byteAt(pos_++);
            const int precision = pqTq >> 4;
            const int id = pqTq & 0x0F;
            if (id > 3) throw DecodeError("DQT: bad table id");
            QuantTable t;
            t.kind = id == 0 ? TableKind::Luminance : TableKind::Chrominance;
            for (int z = 0; z < kBlockSize; ++z) {
                std::uint16_t v;
                if (precision == 0) {
                    v = byteAt(pos_++);
                } else {
                    v = u16At(pos_);
                    pos_ += 2;
                }
                if (v == 0) throw DecodeError("DQT: zero divisor");
                t.zigzag[z] = v;
            }
            quantTables_[id] = t;
        }
        if (pos_ != end) throw DecodeError("DQT: segment length mismatch");
    }

    void parseDht() {
        const std::size_t end = pos_ + u16At(pos_);
        pos_ += 2;
        while (pos_ < end) {
            const int tcTh = byteAt(pos_++);
            const HuffClass cls = (tcTh >> 4) ? HuffClass::Ac : HuffClass::Dc;
            const int id = tcTh & 0x0F;
            if ((tcTh >> 4) > 1 || id > 3) throw DecodeError("DHT: bad table class/id");
            std::array<std::uint8_t, 16> counts{};
            std::size_t total = 0;
            for (auto& c : counts) total += (c = byteAt(pos_++));
            std::vector<std::uint8_t> symbols(total);
            for (auto& s : symbols) s = byteAt(pos_++);
            huffTables_[{cls, id}] = HuffTable::build(cls, id, counts, std::move(symbols));
        }
        if (pos_ != end) throw DecodeError("DHT: segment length mismatch");
    }

    void parseDri() {
        if (u16At(pos_) != 4) throw DecodeError("DRI: bad length");
        restartInterval_ = u16At(pos_ + 2);
        pos_ += 4;
    }

    void parseSof() {
        if (sofSeen_) throw DecodeError("duplicate SOF");
        sofSeen_ = true;
        const std::size_t end = pos_ + u16At(pos_);
        pos_ += 2;
        if (byteAt(pos_++) != 8) throw DecodeError("only 8-bit precision supported");
        result_.height = u16At(pos_);
        result_.width = u16At(pos_ + 2);
        pos_ += 4;
        if (result_.width == 0 || result_.height == 0) throw DecodeError("SOF: zero dimensions");
        const int nc = byteAt(pos_++);
        if (nc != 1 && nc != 3) throw DecodeError("only 1- or 3-component streams supported");
        for (int c = 0; c < nc; ++c) {
            FrameComponent fc;
            fc.id = byteAt(pos_);
            fc.hSamp = byteAt(pos_ + 1) >> 4;
            fc.vSamp = byteAt(pos_ + 1) & 0x0F;
            fc.quantId = byteAt(pos_ + 2);
            pos_ += 3;
            if (nc == 1) {
                // sampling factors carry no meaning for a lone component
                fc.hSamp = fc.vSamp = 1;
            } else if (fc.hSamp != 1 || fc.vSamp != 1) {
                throw DecodeError("chroma subsampling not supported (4:4:4 only)");
            }
            components_.push_back(fc);
        }
        if (pos_ != end) throw DecodeError("SOF: segment length mismatch");
    }

    void parseSosHeader() {
        if (!sofSeen_) throw DecodeError("SOS before SOF");
        pos_ += 2; // length
        const int nc = byteAt(pos_++);
        if (nc != static_cast<int>(components_.size()))
            throw DecodeError("multi-scan streams not supported");
        for (int i = 0; i < nc; ++i) {
            const int id = byteAt(pos_);
            const int tables = byteAt(pos_ + 1);
            pos_ += 2;
            bool found = false;
            for (auto& fc : components_)
                if (fc.id == id) {
                    fc.dcTableId = tables >> 4;
                    fc.acTableId = tables & 0x0F;
                    found = true;
                }
            if (!found) throw DecodeError("SOS references unknown component");
        }
        if (byteAt(pos_) != 0 || byteAt(pos_ + 1) != 63 || byteAt(pos_ + 2) != 0)
            throw DecodeError("non-baseline spectral selection");
        pos_ += 3;
    }

    const HuffTable& huff(HuffClass cls, int id) const {
        auto it = huffTables_.find({cls, id});
        if (it == huffTables_.end()) throw DecodeError("scan references missing Huffman table");
        return it->second;
    }

    void decodeScan() {
        const int bw = (result_.width + kBlockSide - 1) / kBlockSide;
        const int bh = (result_.height + kBlockSide - 1) / kBlockSide;

        for (const FrameComponent& fc : components_) {
            auto qt = quantTables_.find(fc.quantId);
            if (qt == quantTables_.end()) throw DecodeError("component references missing DQT");
            CoefficientTensor t;
            t.componentId = fc.id;
            t.blocksHigh = bh;
            t.blocksWide = bw;
            t.table = qt->second;
            t.blocks.assign(static_cast<std::size_t>(bw) * bh, CoeffBlock{});
            result_.components.push_back(std::move(t));
        }

        BitReader bits(data_.subspan(pos_));
        std::vector<int> dcPred(components_.size(), 0);
        const long mcuCount = static_cast<long>(bw) * bh;
        for (long mcu = 0; mcu < mcuCount; ++mcu) {
            if (restartInterval_ > 0 && mcu > 0 && mcu % restartInterval_ == 0) {
                bits.consumeRestart();
                std::fill(dcPred.begin(), dcPred.end(), 0);
            }
            for (std::size_t c = 0; c < components_.size(); ++c)
                decodeBlock(bits, result_.components[c].blocks[mcu], dcPred[c], components_[c]);
        }
        pos_ += bits.consumedBytes();
    }

    void decodeBlock(BitReader& bits, CoeffBlock& block, int& dcPred, const FrameComponent& fc) {
        const int dcCat = bits.decodeSymbol(huff(HuffClass::Dc, fc.dcTableId));
        if (dcCat > 11) throw DecodeError("DC category out of range");
        dcPred += bits.receiveExtend(dcCat);
        block[0] = static_cast<std::int16_t>(dcPred);

        const HuffTable& ac = huff(HuffClass::Ac, fc.acTableId);
        int k = 1;
        while (k < kBlockSize) {
            const int sym = bits.decodeSymbol(ac);
            const int run = sym >> 4;
            const int cat = sym & 0x0F;
            if (cat == 0) {
                if (run == 15) {
                    k += 16;
                    continue;
                }
                break; // EOB
            }
            k += run;
            if (k >= kBlockSize) throw DecodeError("AC run overflows block");
            block[kZigzagToNatural[k]] = static_cast<std::int16_t>(bits.receiveExtend(cat));
            ++k;
        }
        if (k > kBlockSize) throw DecodeError("AC coefficients overflow block");
    }

    void expectEoi() {
        // Skip fill bytes, tolerate a stray restart, then require EOI.
        while (pos_ + 1 < data_.size()) {
            if (byteAt(pos_) != 0xFF) throw DecodeError("garbage after scan data");
            const std::uint8_t m = byteAt(pos_ + 1);
            if (m == 0xFF) {
                ++pos_;
                continue;
            }
            if (m == 0xD9) return;
            if (m >= 0xD0 && m <= 0xD7) {
                pos_ += 2;
                continue;
            }
            throw DecodeError("unexpected marker after scan data");
        }
        throw DecodeError("missing EOI");
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    DecodedCoefficients result_;
    std::vector<FrameComponent> components_;
    std::map<int, QuantTable> quantTables_;
    std::map<std::pair<HuffClass, int>, HuffTable> huffTables_;
    int restartInterval_ = 0;
    bool sofSeen_ = false;
};

} // namespace

DecodedCoefficients partialDecode(const JpegStream& stream) {
    return StreamParser(stream.bytes).run();
}

PixelImage decodeImage(const JpegStream& stream) {
    const DecodedCoefficients coeffs = partialDecode(stream);
    const int nc = static_cast<int>(coeffs.components.size());

    PixelImage img(coeffs.width, coeffs.height, nc);
    for (int c = 0; c < nc; ++c) {
        const CoefficientTensor& t = coeffs.components[c];
        std::uint8_t* plane = img.plane(c);
        for (int br = 0; br < t.blocksHigh; ++br)
            for (int bc = 0; bc < t.blocksWide; ++bc) {
                const DctBlock px = idct8x8(dequantizeBlock(t.block(br, bc), t.table));
                for (int y = 0; y < kBlockSide; ++y) {
                    const int iy = br * kBlockSide + y;
                    if (iy >= coeffs.height) break;
                    for (int x = 0; x < kBlockSide; ++x) {
                        const int ix = bc * kBlockSide + x;
                        if (ix >= coeffs.width) break;
                        plane[static_cast<std::size_t>(iy) * coeffs.width + ix] =
                            clampToByte(px[y * kBlockSide + x] + 128.0);
                    }
                }
            }
    }
    return nc == 3 ? ycbcrToRgb(img) : img;
}

} // namespace cdbin::jpeg
