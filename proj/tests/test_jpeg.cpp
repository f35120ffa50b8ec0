#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cdbin/data/synthetic.hpp"
#include "cdbin/jpeg/codec.hpp"
#include "cdbin/jpeg/color.hpp"
#include "cdbin/jpeg/dct.hpp"
#include "oracle/libjpeg_ref.hpp"

using namespace cdbin;
using namespace cdbin::jpeg;

namespace {

// Direct double-sum DCT-II, straight from the definition. Oracle only.
DctBlock dctBruteForce(const DctBlock& f) {
    const double pi = std::acos(-1.0);
    DctBlock F{};
    for (int v = 0; v < 8; ++v)
        for (int u = 0; u < 8; ++u) {
            double s = 0;
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    s += f[y * 8 + x] * std::cos((2 * x + 1) * u * pi / 16.0) *
                         std::cos((2 * y + 1) * v * pi / 16.0);
            const double cu = u == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
            const double cv = v == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
            F[v * 8 + u] = 0.25 * cu * cv * s;
        }
    return F;
}

DctBlock randomBlock(std::mt19937& rng, double lo = -128.0, double hi = 127.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    DctBlock b;
    for (double& v : b) v = dist(rng);
    return b;
}

// Coefficient values restricted to what baseline entropy coding can carry.
CoeffBlock randomCoeffBlock(std::mt19937& rng) {
    std::uniform_int_distribution<int> dc(-1024, 1016);
    std::uniform_int_distribution<int> ac(-1023, 1023);
    std::uniform_real_distribution<double> sparsity(0.0, 1.0);
    const double density = sparsity(rng); // vary from near-empty to dense blocks
    CoeffBlock b{};
    b[0] = static_cast<std::int16_t>(dc(rng));
    for (int i = 1; i < kBlockSize; ++i)
        b[i] = sparsity(rng) < density ? static_cast<std::int16_t>(ac(rng)) : 0;
    return b;
}

DecodedCoefficients randomTensor(std::mt19937& rng, int blocksHigh, int blocksWide,
                                 int components) {
    DecodedCoefficients d;
    d.width = blocksWide * 8;
    d.height = blocksHigh * 8;
    for (int c = 0; c < components; ++c) {
        CoefficientTensor t;
        t.componentId = c + 1;
        t.blocksHigh = blocksHigh;
        t.blocksWide = blocksWide;
        t.table = scaleQuantTable(c == 0 ? TableKind::Luminance : TableKind::Chrominance, 50);
        for (int i = 0; i < blocksHigh * blocksWide; ++i) t.blocks.push_back(randomCoeffBlock(rng));
        d.components.push_back(std::move(t));
    }
    return d;
}

PixelImage randomGray(std::mt19937& rng, int w, int h) {
    PixelImage img(w, h, 1);
    std::uniform_int_distribution<int> dist(0, 255);
    for (auto& s : img.samples) s = static_cast<std::uint8_t>(dist(rng));
    return img;
}

double psnrOf(const PixelImage& a, const PixelImage& b) {
    REQUIRE(a.samples.size() == b.samples.size());
    double mse = 0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        const double d = double(a.samples[i]) - double(b.samples[i]);
        mse += d * d;
    }
    mse /= double(a.samples.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

} // namespace

TEST_CASE("color transform hits the BT.601 reference points") {
    PixelImage rgb(1, 3, 3);
    // pixel 0: white, pixel 1: black, pixel 2: pure red
    rgb.plane(0)[0] = 255; rgb.plane(1)[0] = 255; rgb.plane(2)[0] = 255;
    rgb.plane(0)[1] = 0;   rgb.plane(1)[1] = 0;   rgb.plane(2)[1] = 0;
    rgb.plane(0)[2] = 255; rgb.plane(1)[2] = 0;   rgb.plane(2)[2] = 0;

    const PixelImage ycc = rgbToYcbcr(rgb);
    CHECK(ycc.plane(0)[0] == 255);
    CHECK(ycc.plane(1)[0] == 128);
    CHECK(ycc.plane(2)[0] == 128);
    CHECK(ycc.plane(0)[1] == 0);
    CHECK(ycc.plane(1)[1] == 128);
    CHECK(ycc.plane(2)[1] == 128);
    CHECK(ycc.plane(0)[2] == 76);
    CHECK(ycc.plane(1)[2] == 85);
    CHECK(ycc.plane(2)[2] == 255); // clamped
}

TEST_CASE("color transform round-trips within one level") {
    std::mt19937 rng(11);
    PixelImage rgb(16, 16, 3);
    std::uniform_int_distribution<int> dist(0, 255);
    for (auto& s : rgb.samples) s = static_cast<std::uint8_t>(dist(rng));

    const PixelImage back = ycbcrToRgb(rgbToYcbcr(rgb));
    for (std::size_t i = 0; i < rgb.samples.size(); ++i)
        CHECK(std::abs(int(rgb.samples[i]) - int(back.samples[i])) <= 1);
}

TEST_CASE("color transform rejects grayscale input") {
    CHECK_THROWS_AS(rgbToYcbcr(PixelImage(8, 8, 1)), Error);
}

TEST_CASE("splitBlocks counts, level shift, and bad dimensions") {
    PixelImage gray(256, 256, 1, 128);
    auto blocks = splitBlocks(gray.plane(0), 256, 256);
    CHECK(blocks.size() == 1024);
    for (double v : blocks[0]) CHECK(v == 0.0);

    PixelImage bright(16, 8, 1, 255);
    for (const auto& b : splitBlocks(bright.plane(0), 16, 8))
        for (double v : b) CHECK(v == 127.0);

    CHECK_THROWS_AS(splitBlocks(gray.plane(0), 100, 256), Error);
}

TEST_CASE("fdct matches the brute-force definition") {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        const DctBlock b = randomBlock(rng);
        const DctBlock fast = fdct8x8(b);
        const DctBlock ref = dctBruteForce(b);
        for (int i = 0; i < kBlockSize; ++i) CHECK(fast[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    }
}

TEST_CASE("fdct of a constant 127 block is DC-only 1016") {
    DctBlock b;
    b.fill(127.0);
    const DctBlock F = fdct8x8(b);
    CHECK(F[0] == doctest::Approx(1016.0).epsilon(1e-12));
    for (int i = 1; i < kBlockSize; ++i) CHECK(std::abs(F[i]) < 1e-9);

    DctBlock zero{};
    for (double v : fdct8x8(zero)) CHECK(v == 0.0);
}

TEST_CASE("idct inverts fdct below 1e-9") {
    std::mt19937 rng(7);
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const DctBlock b = randomBlock(rng);
        const DctBlock back = idct8x8(fdct8x8(b));
        for (int i = 0; i < kBlockSize; ++i) worst = std::max(worst, std::abs(back[i] - b[i]));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("idct of a lone DC 1016 gives a constant 127 block") {
    DctBlock c{};
    c[0] = 1016.0;
    for (double v : idct8x8(c)) CHECK(v == doctest::Approx(127.0).epsilon(1e-12));
}

TEST_CASE("idct of a single unit coefficient is the sampled cosine product") {
    const double pi = std::acos(-1.0);
    const int u = 3, v = 2; // arbitrary nonzero frequency pair
    DctBlock c{};
    c[v * 8 + u] = 1.0;
    const DctBlock px = idct8x8(c);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            const double expected = 0.25 * std::cos((2 * x + 1) * u * pi / 16.0) *
                                    std::cos((2 * y + 1) * v * pi / 16.0);
            CHECK(px[y * 8 + x] == doctest::Approx(expected).epsilon(1e-12));
        }
}

TEST_CASE("quant table scaling follows the IJG formula") {
    const QuantTable q50 = scaleQuantTable(TableKind::Luminance, 50);
    CHECK(q50.natural(0) == 16); // unscaled standard table
    CHECK(q50.natural(1) == 11);
    CHECK(q50.natural(63) == 99);

    const QuantTable q100 = scaleQuantTable(TableKind::Chrominance, 100);
    for (int z = 0; z < kBlockSize; ++z) CHECK(q100.zigzag[z] == 1);

    const QuantTable q25 = scaleQuantTable(TableKind::Luminance, 25);
    CHECK(q25.natural(0) == 32); // (16*200+50)/100

    CHECK_THROWS_AS(scaleQuantTable(TableKind::Luminance, 0), Error);
    CHECK_THROWS_AS(scaleQuantTable(TableKind::Luminance, 101), Error);
}

TEST_CASE("quantization rounds half away from zero and inverts exactly") {
    const QuantTable q50 = scaleQuantTable(TableKind::Luminance, 50);
    DctBlock c{};
    c[0] = 1016.0; // 1016/16 = 63.5 -> 64
    const CoeffBlock qb = quantizeBlock(c, q50);
    CHECK(qb[0] == 64);
    for (int i = 1; i < kBlockSize; ++i) CHECK(qb[i] == 0);

    const DctBlock back = dequantizeBlock(qb, q50);
    CHECK(back[0] == 1024.0);

    // quantize(dequantize(c)) == c for any coefficient block
    std::mt19937 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const CoeffBlock b = randomCoeffBlock(rng);
        CHECK(quantizeBlock(dequantizeBlock(b, q50), q50) == b);
    }
}

TEST_CASE("zig-zag visits the documented corner order and round-trips") {
    CHECK(kZigzagToNatural[0] == 0);  // (0,0)
    CHECK(kZigzagToNatural[1] == 1);  // (0,1)
    CHECK(kZigzagToNatural[2] == 8);  // (1,0)
    CHECK(kZigzagToNatural[3] == 16); // (2,0)

    CoeffBlock dcOnly{};
    dcOnly[0] = 31;
    const CoeffBlock seq = zigzagScan(dcOnly);
    CHECK(seq[0] == 31);
    for (int i = 1; i < kBlockSize; ++i) CHECK(seq[i] == 0);

    std::mt19937 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const CoeffBlock b = randomCoeffBlock(rng);
        CHECK(inverseZigzag(zigzagScan(b)) == b);
    }
}

TEST_CASE("dpcm differences and prefix-sum inverse") {
    const std::vector<int> dcs = {64, 66, 65};
    CHECK(dpcmEncode(dcs) == std::vector<int>{64, 2, -1});
    CHECK(dpcmEncode(std::vector<int>{5, 5, 5}) == std::vector<int>{5, 0, 0});

    std::mt19937 rng(9);
    std::uniform_int_distribution<int> dist(-1024, 1016);
    std::vector<int> xs(100);
    for (int& v : xs) v = dist(rng);
    CHECK(dpcmDecode(dpcmEncode(xs)) == xs);

    CHECK_THROWS_AS(dpcmEncode(std::vector<int>{}), Error);
}

TEST_CASE("AC run-length coding: EOB, runs, and the ZRL rule") {
    std::vector<std::int16_t> ac(63, 0);
    CHECK(rleEncodeAc(ac) == std::vector<RleSymbol>{{0, 0}});

    std::fill(ac.begin(), ac.end(), 0);
    ac[3] = 5;
    CHECK(rleEncodeAc(ac) == std::vector<RleSymbol>{{3, 5}, {0, 0}});

    std::fill(ac.begin(), ac.end(), 0);
    ac[20] = 7; // 20 zeros, then 7
    CHECK(rleEncodeAc(ac) == std::vector<RleSymbol>{{15, 0}, {4, 7}, {0, 0}});
}

TEST_CASE("AC run-length round-trip including a block with no EOB") {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        CoeffBlock b = randomCoeffBlock(rng);
        if (trial % 4 == 0) b[63] = 9; // force a nonzero tail: encoder emits no EOB
        const CoeffBlock zz = zigzagScan(b);
        const std::span<const std::int16_t> ac(zz.data() + 1, 63);
        const auto symbols = rleEncodeAc(ac);
        std::array<std::int16_t, 63> back{};
        rleDecodeAc(symbols, back);
        for (int i = 0; i < 63; ++i) CHECK(back[i] == ac[i]);
    }
}

TEST_CASE("AC run-length decode rejects malformed symbol streams") {
    std::array<std::int16_t, 63> out{};
    CHECK_THROWS_AS(rleDecodeAc(std::vector<RleSymbol>{{16, 3}}, out), DecodeError);
    CHECK_THROWS_AS(rleDecodeAc(std::vector<RleSymbol>{{0, 0}, {1, 2}}, out), DecodeError);
    CHECK_THROWS_AS(rleDecodeAc(std::vector<RleSymbol>{{3, 1}}, out), DecodeError); // unterminated
    CHECK_THROWS_AS(rleDecodeAc(std::vector<RleSymbol>{{7, 0}}, out), DecodeError);
}

TEST_CASE("entropy layer round-trips random coefficient tensors bit-exactly") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 60; ++trial) {
        const int bh = 1 + trial % 4, bw = 1 + (trial / 4) % 4;
        const DecodedCoefficients d = randomTensor(rng, bh, bw, trial % 2 ? 3 : 1);
        const JpegStream s = encodeCoefficients(d);
        CHECK(partialDecode(s) == d);
    }
}

TEST_CASE("single all-zero block round-trips") {
    DecodedCoefficients d;
    d.width = 8;
    d.height = 8;
    CoefficientTensor t;
    t.componentId = 1;
    t.blocksHigh = t.blocksWide = 1;
    t.table = scaleQuantTable(TableKind::Luminance, 50);
    t.blocks.push_back(CoeffBlock{});
    d.components.push_back(t);
    CHECK(partialDecode(encodeCoefficients(d)) == d);
}

TEST_CASE("encoding an empty tensor is rejected") {
    DecodedCoefficients d;
    d.width = 0;
    d.height = 0;
    CHECK_THROWS_AS(encodeCoefficients(d), Error);
    CoefficientTensor t;
    d.components.push_back(t);
    CHECK_THROWS_AS(encodeCoefficients(d), Error);
}

TEST_CASE("stream starts with SOI and ends with EOI, stuffing preserved") {
    std::mt19937 rng(23);
    const JpegStream s = encodeCoefficients(randomTensor(rng, 4, 4, 1));
    REQUIRE(s.bytes.size() > 4);
    CHECK(s.bytes[0] == 0xFF);
    CHECK(s.bytes[1] == 0xD8);
    CHECK(s.bytes[s.bytes.size() - 2] == 0xFF);
    CHECK(s.bytes.back() == 0xD9);
}

TEST_CASE("pipeline coherence: partial decode equals in-process quantization") {
    std::mt19937 rng(29);
    SUBCASE("grayscale") {
        const PixelImage img = randomGray(rng, 32, 24);
        CHECK(partialDecode(encodeImage(img, 50)) == imageToCoefficients(img, 50));
    }
    SUBCASE("color") {
        PixelImage img(16, 16, 3);
        std::uniform_int_distribution<int> dist(0, 255);
        for (auto& v : img.samples) v = static_cast<std::uint8_t>(dist(rng));
        CHECK(partialDecode(encodeImage(img, 75)) == imageToCoefficients(img, 75));
    }
}

TEST_CASE("all-128 gray image yields all-zero coefficients and decodes back") {
    const PixelImage gray(64, 64, 1, 128);
    const JpegStream s = encodeImage(gray, 50);
    const DecodedCoefficients d = partialDecode(s);
    for (const auto& t : d.components)
        for (const auto& b : t.blocks)
            for (std::int16_t v : b) CHECK(v == 0);
    CHECK(decodeImage(s) == gray);
}

TEST_CASE("constant image survives the full round trip exactly") {
    // Even offsets from 128 give a DC value divisible by the quality-50
    // luminance divisor, so the single surviving coefficient is exact.
    for (std::uint8_t v : {78, 128, 200}) {
        const PixelImage gray(32, 32, 1, v);
        CHECK(decodeImage(encodeImage(gray, 50)) == gray);
    }
}

TEST_CASE("round-trip quality ordering and PSNR floor on a document tile") {
    const auto doc = data::synthDocument(256, 256, 99);
    const double p50 = psnrOf(doc.document, decodeImage(encodeImage(doc.document, 50)));
    const double p90 = psnrOf(doc.document, decodeImage(encodeImage(doc.document, 90)));
    const double p10 = psnrOf(doc.document, decodeImage(encodeImage(doc.document, 10)));
    CHECK(p90 > p10);
    CHECK(p50 > 30.0);
}

TEST_CASE("text tiles at quality 50 compress at least 10:1") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const auto doc = data::synthDocument(256, 256, seed);
        const JpegStream s = encodeImage(doc.document, 50);
        CHECK(compressionRatio(doc.document.samples.size(), s.bytes.size()) >= 10.0);
    }
}

TEST_CASE("compressionRatio arithmetic and errors") {
    CHECK(compressionRatio(3072, 48) == doctest::Approx(64.0));
    CHECK(compressionRatio(1000, 1000) == doctest::Approx(1.0));
    CHECK_THROWS_AS(compressionRatio(100, 0), Error);
    CHECK_THROWS_AS(compressionRatio(0, 100), Error);
}

TEST_CASE("energy compaction: most nonzero coefficients sit in low frequencies") {
    long inFirst16 = 0, nonzero = 0;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto doc = data::synthDocument(256, 256, 100 + seed);
        const DecodedCoefficients d = imageToCoefficients(doc.document, 50);
        for (const auto& t : d.components)
            for (const auto& b : t.blocks) {
                const CoeffBlock zz = zigzagScan(b);
                for (int z = 0; z < kBlockSize; ++z)
                    if (zz[z] != 0) {
                        ++nonzero;
                        if (z < 16) ++inFirst16;
                    }
            }
    }
    REQUIRE(nonzero > 0);
    CHECK(double(inFirst16) / double(nonzero) >= 0.90);
}

TEST_CASE("coefficient dump round-trips") {
    std::mt19937 rng(31);
    const DecodedCoefficients d = randomTensor(rng, 2, 3, 3);
    CHECK(parseCoeffDump(writeCoeffDump(d)) == d);
}

TEST_CASE("decoder rejects malformed streams with named errors") {
    std::mt19937 rng(37);
    const JpegStream good = encodeCoefficients(randomTensor(rng, 2, 2, 1));

    SUBCASE("truncated stream") {
        JpegStream bad = good;
        bad.bytes.resize(bad.bytes.size() / 2);
        CHECK_THROWS_AS(partialDecode(bad), DecodeError);
    }
    SUBCASE("not a JPEG") {
        JpegStream bad;
        bad.bytes = {0x00, 0x11, 0x22};
        CHECK_THROWS_AS(partialDecode(bad), DecodeError);
    }
    SUBCASE("progressive SOF is named") {
        JpegStream bad = good;
        for (std::size_t i = 0; i + 1 < bad.bytes.size(); ++i)
            if (bad.bytes[i] == 0xFF && bad.bytes[i + 1] == 0xC0) {
                bad.bytes[i + 1] = 0xC2;
                break;
            }
        CHECK_THROWS_WITH_AS(partialDecode(bad), doctest::Contains("progressive"), DecodeError);
    }
    SUBCASE("missing EOI") {
        JpegStream bad = good;
        bad.bytes.pop_back();
        bad.bytes.pop_back();
        CHECK_THROWS_AS(partialDecode(bad), DecodeError);
    }
}

TEST_CASE("interop: coefficients match the libjpeg oracle exactly") {
    std::mt19937 rng(41);

    SUBCASE("gradient image") {
        PixelImage img(64, 48, 1);
        for (int y = 0; y < 48; ++y)
            for (int x = 0; x < 64; ++x) img.at(0, y, x) = static_cast<std::uint8_t>((x * 4 + y) % 256);
        const auto bytes = testsupport::oracle::encodeJpeg(img, 50);
        const DecodedCoefficients mine = partialDecode(JpegStream{bytes});
        const DecodedCoefficients ref = testsupport::oracle::readCoefficients(bytes);
        CHECK(writeCoeffDump(mine) == writeCoeffDump(ref));
    }
    SUBCASE("synthetic document, odd size forces block padding") {
        const auto doc = data::synthDocument(200, 120, 5);
        PixelImage img(201, 119, 1);
        for (int y = 0; y < 119; ++y)
            for (int x = 0; x < 201; ++x)
                img.at(0, y, x) = doc.document.at(0, y % 120, x % 200);
        const auto bytes = testsupport::oracle::encodeJpeg(img, 75);
        CHECK(writeCoeffDump(partialDecode(JpegStream{bytes})) ==
              writeCoeffDump(testsupport::oracle::readCoefficients(bytes)));
    }
    SUBCASE("color 4:4:4") {
        PixelImage img(32, 32, 3);
        std::uniform_int_distribution<int> dist(0, 255);
        for (auto& v : img.samples) v = static_cast<std::uint8_t>(dist(rng));
        const auto bytes = testsupport::oracle::encodeJpeg(img, 60);
        CHECK(writeCoeffDump(partialDecode(JpegStream{bytes})) ==
              writeCoeffDump(testsupport::oracle::readCoefficients(bytes)));
    }
    SUBCASE("restart markers are tolerated") {
        const auto doc = data::synthDocument(128, 64, 6);
        const auto bytes = testsupport::oracle::encodeJpeg(doc.document, 50, /*restartInterval=*/3);
        CHECK(writeCoeffDump(partialDecode(JpegStream{bytes})) ==
              writeCoeffDump(testsupport::oracle::readCoefficients(bytes)));
    }
}

TEST_CASE("interop: pixel decode stays within one level of libjpeg") {
    for (std::uint64_t seed : {50ull, 51ull, 52ull}) {
        const auto doc = data::synthDocument(120, 88, seed);
        const auto bytes = testsupport::oracle::encodeJpeg(doc.document, 50);
        const PixelImage mine = decodeImage(JpegStream{bytes});
        const PixelImage ref = testsupport::oracle::decodePixels(bytes);
        REQUIRE(mine.width == ref.width);
        REQUIRE(mine.height == ref.height);
        int worst = 0;
        for (std::size_t i = 0; i < mine.samples.size(); ++i)
            worst = std::max(worst, std::abs(int(mine.samples[i]) - int(ref.samples[i])));
        CHECK(worst <= 1);
    }
}

TEST_CASE("interop: libjpeg decodes this encoder's output") {
    const auto doc = data::synthDocument(256, 256, 77);
    const JpegStream s = encodeImage(doc.document, 50);
    const PixelImage ref = testsupport::oracle::decodePixels(s.bytes);
    const PixelImage mine = decodeImage(s);
    REQUIRE(ref.width == 256);
    int worst = 0;
    for (std::size_t i = 0; i < mine.samples.size(); ++i)
        worst = std::max(worst, std::abs(int(mine.samples[i]) - int(ref.samples[i])));
    CHECK(worst <= 1);
}

TEST_CASE("grayscale streams ignore declared sampling factors") {
    const auto doc = data::synthDocument(64, 64, 91);
    JpegStream s = encodeImage(doc.document, 50);
    const PixelImage expected = decodeImage(s);

    // patch the lone component's sampling byte in SOF0 from 1x1 to 2x2
    bool patched = false;
    for (std::size_t i = 0; i + 9 < s.bytes.size(); ++i)
        if (s.bytes[i] == 0xFF && s.bytes[i + 1] == 0xC0) {
            REQUIRE(s.bytes[i + 11] == 0x11);
            s.bytes[i + 11] = 0x22;
            patched = true;
            break;
        }
    REQUIRE(patched);
    CHECK(decodeImage(s) == expected);
}
