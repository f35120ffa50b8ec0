#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cdbin/image.hpp"
#include "cdbin/jpeg/codec.hpp"

namespace cdbin::data {

class ManifestError : public Error {
public:
    using Error::Error;
};

struct PadInfo {
    int border = 128;
    int origWidth = 0, origHeight = 0;
    int paddedWidth = 0, paddedHeight = 0;
};

struct PaddedImage {
    PixelImage image;
    PadInfo info;
};

/// Black border of `border` pixels on all four sides, then black round-up
/// padding on the right/bottom to the next multiple of `multiple`.
PaddedImage padImage(const PixelImage& img, int border = 128, int multiple = 256);

struct Tile {
    int row = 0, col = 0;
    PixelImage image;
};

/// Row-major non-overlapping tiles; dimensions must divide evenly.
std::vector<Tile> tileImage(const PixelImage& img, int tileSize = 256);

/// Inverse of tileImage over the padded grid (no crop).
PixelImage assembleTiles(const std::vector<Tile>& tiles, int tileSize, int paddedWidth,
                         int paddedHeight);

struct TilePair {
    std::string docId;
    int row = 0, col = 0;
    jpeg::JpegStream stream;  // JPEG-encoded document tile
    PixelImage groundTruth;   // binary map, values in {0,255}
};

/// Pads both images, tiles them, JPEG-encodes the document tiles at `quality`
/// and thresholds non-binary ground truth at 127.
std::vector<TilePair> buildPairs(const PixelImage& doc, const PixelImage& groundTruth,
                                 const std::string& docId, int quality, int border = 128,
                                 int tileSize = 256);

struct DocumentRecord {
    std::string id;
    std::string sourcePath;
    std::string gtPath;
    int origWidth = 0, origHeight = 0;
    int paddedWidth = 0, paddedHeight = 0;
    std::string split = "train"; // train | test

    bool operator==(const DocumentRecord&) const = default;
};

struct TileRef {
    std::string docId;
    int row = 0, col = 0;
    std::string jpgPath; // relative to the manifest directory
    std::string gtPath;

    bool operator==(const TileRef&) const = default;
};

struct DatasetManifest {
    int version = 1;
    int quality = 50;
    int tileSize = 256;
    int border = 128;
    std::uint64_t seed = 0;
    std::vector<DocumentRecord> records;
    std::vector<TileRef> tiles;

    bool operator==(const DatasetManifest&) const = default;
};

/// Document-level split: shuffles record ids with the seed and tags the first
/// fraction as train, the rest as test. fraction must lie strictly in (0,1).
void splitTrainTest(DatasetManifest& manifest, double fraction, std::uint64_t seed);

void writeManifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Loads and validates a manifest; every referenced tile file must exist.
DatasetManifest loadManifest(const std::filesystem::path& path);

struct PrepareOptions {
    int quality = 50;
    int tileSize = 256;
    int border = 128;
    double trainFraction = 0.8;
    std::uint64_t seed = 0;
};

/// Full ingestion: reads PNM documents from docsDir with same-named ground
/// truth in gtDir, splits, encodes tiles under outDir/<split>/<doc>/<r>_<c>.jpg
/// (+ .gt), and writes outDir/manifest.json.
DatasetManifest prepareDataset(const std::filesystem::path& docsDir,
                               const std::filesystem::path& gtDir,
                               const std::filesystem::path& outDir, const PrepareOptions& opts);

/// Loads the stored tile pairs of one split, ordered by manifest appearance.
std::vector<TilePair> loadTilePairs(const DatasetManifest& manifest,
                                    const std::filesystem::path& manifestDir,
                                    const std::string& split);

} // namespace cdbin::data
