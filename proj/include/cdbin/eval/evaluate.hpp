#pragma once

#include <functional>
#include <optional>

#include "cdbin/data/dataset.hpp"
#include "cdbin/gan/model.hpp"

namespace cdbin::eval {

/// Reassembles one document's tiles onto the padded grid and crops both the
/// border and the round-up padding back to the original dimensions.
/// Throws on missing or duplicate tiles.
PixelImage reassembleTiles(const std::vector<data::Tile>& tiles,
                           const data::DocumentRecord& record, int tileSize, int border);

struct DocumentMetrics {
    std::string docId;
    double mseValue = 0;
    double psnrDecompressed = 0; // binary output vs ground truth, pixel domain
    double psnrCompressed = 0;   // both sides re-encoded at the corpus quality
    double accuracy = 0;
};

struct MetricReport {
    std::vector<DocumentMetrics> documents;
    double meanPsnrDecompressed = 0;
    double meanPsnrCompressed = 0;
    double meanAccuracy = 0;
};

/// Produces the binary map for one compressed tile. The ground-truth tile is
/// supplied so test oracles can stand in for a trained model.
using TileBinarizer =
    std::function<PixelImage(const jpeg::JpegStream& tileStream, const PixelImage& gtTile)>;

/// Wraps a trained model as a TileBinarizer (ignores the ground-truth input).
TileBinarizer modelBinarizer(gan::DdganModel& model);

/// Binarizes every document of the split tile by tile, reassembles, and
/// reports PSNR in both the decompressed and re-encoded comparisons.
MetricReport evaluateCorpus(const data::DatasetManifest& manifest,
                            const std::filesystem::path& manifestDir, const std::string& split,
                            const TileBinarizer& binarizer);

std::string metricReportJsonl(const MetricReport& report);
std::string metricReportTable(const MetricReport& report);

} // namespace cdbin::eval
