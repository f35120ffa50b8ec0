#include "cdbin/gan/infer.hpp"

#include <cmath>

#include "cdbin/gan/train.hpp"

namespace cdbin::gan {

PixelImage generatorProbImage(DdganModel& model, const Tensorf& grid) {
    if (grid.rank() != 3) throw Error("generatorProbImage: (C,Hb,Wb) grid required");
    Tapef tape;
    Tensorf batched = Tensorf::fromData({1, grid.dim(0), grid.dim(1), grid.dim(2)},
                                        std::vector<Real>(grid.data(), grid.data() + grid.size()));
    Varf out = model.generator.forward(tape, tape.constant(batched));
    const Tensorf& prob = tape.value(out);

    PixelImage img(prob.dim(3), prob.dim(2), 1);
    for (std::size_t i = 0; i < img.samples.size(); ++i)
        img.samples[i] = clampToByte(prob[i] * Real(255));
    return img;
}

PixelImage thresholdBinarize(const PixelImage& map, int threshold) {
    PixelImage out(map.width, map.height, map.components);
    for (std::size_t i = 0; i < map.samples.size(); ++i)
        out.samples[i] = map.samples[i] > threshold ? 255 : 0;
    return out;
}

namespace {

// Quantized representation of an all-black 8x8 block: DC = round(-1024/q), AC 0.
jpeg::CoeffBlock blackBlock(const jpeg::QuantTable& table) {
    jpeg::CoeffBlock b{};
    b[0] = static_cast<std::int16_t>(std::lround(-1024.0 / table.natural(0)));
    return b;
}

} // namespace

PixelImage binarizeStream(const jpeg::JpegStream& stream, DdganModel& model,
                          const BinarizeOptions& opts) {
    if (opts.tileSize % jpeg::kBlockSide != 0)
        throw Error("binarizeStream: tile size must be a multiple of 8");
    const jpeg::DecodedCoefficients coeffs = jpeg::partialDecode(stream);
    if (coeffs.components.empty()) throw Error("binarizeStream: no components");
    const jpeg::CoefficientTensor& luma = coeffs.components[0]; // gray or Y

    // Pad the block grid to whole tiles with quantized black, mirroring the
    // ingestion padding rule, all inside the coefficient domain.
    const int tileBlocks = opts.tileSize / jpeg::kBlockSide;
    const int tilesHigh = (luma.blocksHigh + tileBlocks - 1) / tileBlocks;
    const int tilesWide = (luma.blocksWide + tileBlocks - 1) / tileBlocks;
    jpeg::CoefficientTensor padded;
    padded.componentId = luma.componentId;
    padded.table = luma.table;
    padded.blocksHigh = tilesHigh * tileBlocks;
    padded.blocksWide = tilesWide * tileBlocks;
    padded.blocks.assign(static_cast<std::size_t>(padded.blocksHigh) * padded.blocksWide,
                         blackBlock(luma.table));
    for (int br = 0; br < luma.blocksHigh; ++br)
        for (int bc = 0; bc < luma.blocksWide; ++bc) padded.block(br, bc) = luma.block(br, bc);

    PixelImage assembled(padded.blocksWide * jpeg::kBlockSide,
                         padded.blocksHigh * jpeg::kBlockSide, 1);
    for (int tr = 0; tr < tilesHigh; ++tr)
        for (int tc = 0; tc < tilesWide; ++tc) {
            jpeg::CoefficientTensor tile;
            tile.componentId = padded.componentId;
            tile.table = padded.table;
            tile.blocksHigh = tile.blocksWide = tileBlocks;
            tile.blocks.reserve(static_cast<std::size_t>(tileBlocks) * tileBlocks);
            for (int br = 0; br < tileBlocks; ++br)
                for (int bc = 0; bc < tileBlocks; ++bc)
                    tile.blocks.push_back(padded.block(tr * tileBlocks + br, tc * tileBlocks + bc));

            const PixelImage prob = generatorProbImage(model, coefficientGrid(tile));
            for (int y = 0; y < opts.tileSize; ++y)
                for (int x = 0; x < opts.tileSize; ++x)
                    assembled.at(0, tr * opts.tileSize + y, tc * opts.tileSize + x) =
                        prob.at(0, y, x);
        }

    const PixelImage binary = thresholdBinarize(assembled);

    const int cropW = opts.cropWidth > 0 ? opts.cropWidth : coeffs.width;
    const int cropH = opts.cropHeight > 0 ? opts.cropHeight : coeffs.height;
    if (opts.border + cropW > binary.width || opts.border + cropH > binary.height)
        throw Error("binarizeStream: crop exceeds the reassembled map");
    PixelImage out(cropW, cropH, 1);
    for (int y = 0; y < cropH; ++y)
        for (int x = 0; x < cropW; ++x)
            out.at(0, y, x) = binary.at(0, y + opts.border, x + opts.border);
    return out;
}

} // namespace cdbin::gan
