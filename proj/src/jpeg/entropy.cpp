#include "cdbin/jpeg/entropy.hpp"

namespace cdbin::jpeg {

std::vector<RleSymbol> rleEncodeAc(std::span<const std::int16_t> ac) {
    if (ac.size() != kBlockSize - 1)
        throw Error("rleEncodeAc: expected 63 coefficients, got " + std::to_string(ac.size()));

    std::vector<RleSymbol> out;
    int run = 0;
    for (std::int16_t v : ac) {
        if (v == 0) {
            ++run;
            continue;
        }
        while (run > 15) {
            out.push_back({15, 0}); // ZRL
            run -= 16;
        }
        out.push_back({static_cast<std::uint8_t>(run), v});
        run = 0;
    }
    if (run > 0) out.push_back({0, 0}); // EOB
    return out;
}

void rleDecodeAc(std::span<const RleSymbol> symbols, std::span<std::int16_t> ac) {
    if (ac.size() != kBlockSize - 1) throw Error("rleDecodeAc: output must hold 63 coefficients");

    std::size_t k = 0;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        const RleSymbol& s = symbols[i];
        if (s.run > 15) throw DecodeError("rleDecodeAc: run length > 15");
        if (s.value == 0) {
            if (s.run == 0) { // EOB
                if (i + 1 != symbols.size()) throw DecodeError("rleDecodeAc: symbols after EOB");
                while (k < ac.size()) ac[k++] = 0;
                return;
            }
            if (s.run != 15) throw DecodeError("rleDecodeAc: zero value with run != 15");
            if (k + 16 > ac.size()) throw DecodeError("rleDecodeAc: ZRL overruns block");
            for (int j = 0; j < 16; ++j) ac[k++] = 0;
        } else {
            if (k + s.run + 1 > ac.size()) throw DecodeError("rleDecodeAc: run overruns block");
            for (int j = 0; j < s.run; ++j) ac[k++] = 0;
            ac[k++] = s.value;
        }
    }
    if (k != ac.size()) throw DecodeError("rleDecodeAc: block not terminated");
}

std::vector<int> dpcmEncode(std::span<const int> dcs) {
    if (dcs.empty()) throw Error("dpcmEncode: empty sequence");
    std::vector<int> out(dcs.size());
    out[0] = dcs[0];
    for (std::size_t i = 1; i < dcs.size(); ++i) out[i] = dcs[i] - dcs[i - 1];
    return out;
}

std::vector<int> dpcmDecode(std::span<const int> diffs) {
    if (diffs.empty()) throw Error("dpcmDecode: empty sequence");
    std::vector<int> out(diffs.size());
    int acc = 0;
    for (std::size_t i = 0; i < diffs.size(); ++i) out[i] = acc += diffs[i];
    return out;
}

HuffTable HuffTable::build(HuffClass cls, int id, const std::array<std::uint8_t, 16>& counts,
                           std::vector<std::uint8_t> symbols) {
    HuffTable t;
    t.cls = cls;
    t.id = id;
    t.counts = counts;

    std::size_t total = 0;
    for (auto c : counts) total += c;
    if (total > 256) throw DecodeError("Huffman table with more than 256 symbols");
    if (symbols.size() != total) throw DecodeError("Huffman table symbol count mismatch");
    t.symbols = std::move(symbols);

    // Canonical assignment: codes of each length are consecutive, doubling
    // the running code value at every length increase.
    std::uint32_t code = 0;
    std::size_t k = 0;
    for (int len = 1; len <= 16; ++len) {
        if (counts[len - 1] > 0) {
            t.valPtr[len] = static_cast<int>(k);
            t.minCode[len] = static_cast<std::int32_t>(code);
            for (int i = 0; i < counts[len - 1]; ++i) {
                if (code >= (1u << len))
                    throw DecodeError("Huffman bit-length counts overflow code space");
                t.encode[t.symbols[k]] = {static_cast<std::uint16_t>(code), static_cast<std::uint8_t>(len)};
                ++k;
                ++code;
            }
            t.maxCode[len] = static_cast<std::int32_t>(code - 1);
        } else {
            t.maxCode[len] = -1;
        }
        code <<= 1;
    }
    if (counts[15] > 0 && t.maxCode[16] == 0xFFFF)
        throw DecodeError("Huffman code of all ones at length 16");
    return t;
}

namespace {

constexpr std::array<std::uint8_t, 16> kDcLumCounts = {0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
constexpr std::array<std::uint8_t, 16> kDcChromaCounts = {0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
const std::vector<std::uint8_t> kDcValues = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};

constexpr std::array<std::uint8_t, 16> kAcLumCounts = {0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 125};
const std::vector<std::uint8_t> kAcLumValues = {
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07,
    0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08, 0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0,
    0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
    0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49,
    0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69,
    0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
    0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7,
    0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5,
    0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
    0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
    0xF9, 0xFA};

constexpr std::array<std::uint8_t, 16> kAcChromaCounts = {0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 119};
const std::vector<std::uint8_t> kAcChromaValues = {
    0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41, 0x51, 0x07, 0x61, 0x71,
    0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91, 0xA1, 0xB1, 0xC1, 0x09, 0x23, 0x33, 0x52, 0xF0,
    0x15, 0x62, 0x72, 0xD1, 0x0A, 0x16, 0x24, 0x34, 0xE1, 0x25, 0xF1, 0x17, 0x18, 0x19, 0x1A, 0x26,
    0x27, 0x28, 0x29, 0x2A, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48,
    0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68,
    0x69, 0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87,
    0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5,
    0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3,
    0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA,
    0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
    0xF9, 0xFA};

} // namespace

const HuffTable& defaultHuffTable(HuffClass cls, bool chroma) {
    static const HuffTable dcLum = HuffTable::build(HuffClass::Dc, 0, kDcLumCounts, kDcValues);
    static const HuffTable acLum = HuffTable::build(HuffClass::Ac, 0, kAcLumCounts, kAcLumValues);
    static const HuffTable dcChroma = HuffTable::build(HuffClass::Dc, 1, kDcChromaCounts, kDcValues);
    static const HuffTable acChroma = HuffTable::build(HuffClass::Ac, 1, kAcChromaCounts, kAcChromaValues);
    if (cls == HuffClass::Dc) return chroma ? dcChroma : dcLum;
    return chroma ? acChroma : acLum;
}

int magnitudeCategory(int value) {
    int mag = value < 0 ? -value : value;
    int bits = 0;
    while (mag) {
        ++bits;
        mag >>= 1;
    }
    return bits;
}

void BitWriter::put(std::uint32_t code, int bits) {
    acc_ = (acc_ << bits) | (code & ((1u << bits) - 1));
    n_ += bits;
    while (n_ >= 8) {
        n_ -= 8;
        const std::uint8_t byte = static_cast<std::uint8_t>((acc_ >> n_) & 0xFF);
        out_.push_back(byte);
        if (byte == 0xFF) out_.push_back(0x00); // byte stuffing
    }
}

void BitWriter::putValueBits(int value, int category) {
    if (category == 0) return;
    const int bits = value >= 0 ? value : value + (1 << category) - 1;
    put(static_cast<std::uint32_t>(bits), category);
}

void BitWriter::flush() {
    if (n_ > 0) {
        const int pad = 8 - n_; // put() drains whole bytes, so n_ is in [1,7]
        put((1u << pad) - 1, pad);
    }
    n_ = 0;
    acc_ = 0;
}

int BitReader::nextDataByte() {
    if (atMarker_) throw DecodeError("entropy data truncated at marker");
    if (pos_ >= data_.size()) throw DecodeError("entropy data truncated");
    std::uint8_t b = data_[pos_++];
    if (b == 0xFF) {
        if (pos_ >= data_.size()) throw DecodeError("entropy data ends in 0xFF");
        if (data_[pos_] == 0x00) {
            ++pos_; // stuffed data byte
        } else {
            --pos_; // genuine marker; leave it for the segment parser
            atMarker_ = true;
            throw DecodeError("entropy data truncated at marker");
        }
    }
    return b;
}

int BitReader::readBit() {
    if (n_ == 0) {
        acc_ = static_cast<std::uint32_t>(nextDataByte());
        n_ = 8;
    }
    --n_;
    return (acc_ >> n_) & 1;
}

int BitReader::readBits(int n) {
    int v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | readBit();
    return v;
}

int BitReader::receiveExtend(int category) {
    if (category == 0) return 0;
    int v = readBits(category);
    if (v < (1 << (category - 1))) v += 1 - (1 << category);
    return v;
}

int BitReader::decodeSymbol(const HuffTable& table) {
    std::int32_t code = readBit();
    for (int len = 1; len <= 16; ++len) {
        if (table.maxCode[len] >= 0 && code <= table.maxCode[len])
            return table.symbols[table.valPtr[len] + code - table.minCode[len]];
        code = (code << 1) | readBit();
    }
    throw DecodeError("invalid Huffman code");
}

int BitReader::consumeRestart() {
    // Discard padding bits; restart markers sit on byte boundaries.
    acc_ = 0;
    n_ = 0;
    atMarker_ = false;
    if (pos_ + 1 >= data_.size() || data_[pos_] != 0xFF)
        throw DecodeError("expected restart marker");
    const std::uint8_t m = data_[pos_ + 1];
    if (m < 0xD0 || m > 0xD7) throw DecodeError("expected restart marker, found other marker");
    pos_ += 2;
    return m - 0xD0;
}

} // namespace cdbin::jpeg
