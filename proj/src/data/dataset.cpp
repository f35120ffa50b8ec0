#include "cdbin/data/dataset.hpp"

#include <algorithm>
#include <random>

namespace cdbin::data {

PaddedImage padImage(const PixelImage& img, int border, int multiple) {
    if (border < 0) throw Error("padImage: border must be >= 0");
    if (multiple <= 0) throw Error("padImage: multiple must be positive");

    const int withBorderW = img.width + 2 * border;
    const int withBorderH = img.height + 2 * border;
    const int paddedW = (withBorderW + multiple - 1) / multiple * multiple;
    const int paddedH = (withBorderH + multiple - 1) / multiple * multiple;

    PaddedImage out;
    out.info = {border, img.width, img.height, paddedW, paddedH};
    out.image = PixelImage(paddedW, paddedH, img.components, 0);
    for (int c = 0; c < img.components; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                out.image.at(c, y + border, x + border) = img.at(c, y, x);
    return out;
}

std::vector<Tile> tileImage(const PixelImage& img, int tileSize) {
    if (tileSize <= 0 || img.width % tileSize != 0 || img.height % tileSize != 0)
        throw Error("tileImage: dimensions must be multiples of the tile size");

    std::vector<Tile> tiles;
    const int rows = img.height / tileSize;
    const int cols = img.width / tileSize;
    tiles.reserve(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r)
        for (int cc = 0; cc < cols; ++cc) {
            Tile t{r, cc, PixelImage(tileSize, tileSize, img.components)};
            for (int c = 0; c < img.components; ++c)
                for (int y = 0; y < tileSize; ++y)
                    for (int x = 0; x < tileSize; ++x)
                        t.image.at(c, y, x) = img.at(c, r * tileSize + y, cc * tileSize + x);
            tiles.push_back(std::move(t));
        }
    return tiles;
}

PixelImage assembleTiles(const std::vector<Tile>& tiles, int tileSize, int paddedWidth,
                         int paddedHeight) {
    if (tiles.empty()) throw Error("assembleTiles: no tiles");
    if (paddedWidth % tileSize != 0 || paddedHeight % tileSize != 0)
        throw Error("assembleTiles: padded dimensions must be multiples of the tile size");
    const int rows = paddedHeight / tileSize;
    const int cols = paddedWidth / tileSize;
    if (tiles.size() != static_cast<std::size_t>(rows) * cols)
        throw Error("assembleTiles: expected " + std::to_string(rows * cols) + " tiles, got " +
                    std::to_string(tiles.size()));

    const int comps = tiles.front().image.components;
    PixelImage out(paddedWidth, paddedHeight, comps);
    std::vector<bool> seen(tiles.size(), false);
    for (const Tile& t : tiles) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw Error("assembleTiles: tile coordinates out of range");
        const std::size_t slot = static_cast<std::size_t>(t.row) * cols + t.col;
        if (seen[slot]) throw Error("assembleTiles: duplicate tile");
        seen[slot] = true;
        for (int c = 0; c < comps; ++c)
            for (int y = 0; y < tileSize; ++y)
                for (int x = 0; x < tileSize; ++x)
                    out.at(c, t.row * tileSize + y, t.col * tileSize + x) = t.image.at(c, y, x);
    }
    return out;
}

namespace {

PixelImage toBinaryMap(const PixelImage& img) {
    PixelImage out(img.width, img.height, 1);
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] = img.samples[i] > 127 ? 255 : 0;
    return out;
}

PixelImage toGray(const PixelImage& img) {
    if (img.components == 1) return img;
    PixelImage out(img.width, img.height, 1);
    for (std::size_t i = 0; i < out.planeSize(); ++i)
        out.samples[i] = clampToByte(0.299 * img.plane(0)[i] + 0.587 * img.plane(1)[i] +
                                     0.114 * img.plane(2)[i]);
    return out;
}

} // namespace

std::vector<TilePair> buildPairs(const PixelImage& doc, const PixelImage& groundTruth,
                                 const std::string& docId, int quality, int border,
                                 int tileSize) {
    if (doc.width != groundTruth.width || doc.height != groundTruth.height)
        throw Error("buildPairs: document and ground truth dimensions differ");

    const PaddedImage paddedDoc = padImage(toGray(doc), border, tileSize);
    const PaddedImage paddedGt = padImage(toBinaryMap(toGray(groundTruth)), border, tileSize);

    std::vector<Tile> docTiles = tileImage(paddedDoc.image, tileSize);
    std::vector<Tile> gtTiles = tileImage(paddedGt.image, tileSize);

    std::vector<TilePair> pairs;
    pairs.reserve(docTiles.size());
    for (std::size_t i = 0; i < docTiles.size(); ++i) {
        TilePair p;
        p.docId = docId;
        p.row = docTiles[i].row;
        p.col = docTiles[i].col;
        p.stream = jpeg::encodeImage(docTiles[i].image, quality);
        p.groundTruth = std::move(gtTiles[i].image);
        pairs.push_back(std::move(p));
    }
    return pairs;
}

void splitTrainTest(DatasetManifest& manifest, double fraction, std::uint64_t seed) {
    if (manifest.records.empty()) throw Error("splitTrainTest: empty corpus");
    if (!(fraction > 0.0 && fraction < 1.0))
        throw Error("splitTrainTest: fraction must be strictly inside (0,1)");

    std::vector<std::size_t> order(manifest.records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    const std::size_t trainCount = std::max<std::size_t>(
        1, static_cast<std::size_t>(fraction * static_cast<double>(order.size())));
    for (std::size_t i = 0; i < order.size(); ++i)
        manifest.records[order[i]].split = i < trainCount ? "train" : "test";
    manifest.seed = seed;
}

} // namespace cdbin::data
