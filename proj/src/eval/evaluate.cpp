#include "cdbin/eval/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cdbin/eval/metrics.hpp"
#include "cdbin/gan/infer.hpp"
#include "cdbin/gan/train.hpp"

namespace cdbin::eval {

PixelImage reassembleTiles(const std::vector<data::Tile>& tiles,
                           const data::DocumentRecord& record, int tileSize, int border) {
    const int rows = record.paddedHeight / tileSize;
    const int cols = record.paddedWidth / tileSize;
    if (tiles.size() != static_cast<std::size_t>(rows) * cols)
        throw Error("reassembleTiles: document '" + record.id + "' expects " +
                    std::to_string(rows * cols) + " tiles, got " + std::to_string(tiles.size()));

    const PixelImage padded = data::assembleTiles(tiles, tileSize, record.paddedWidth,
                                                  record.paddedHeight);
    PixelImage out(record.origWidth, record.origHeight, padded.components);
    for (int c = 0; c < padded.components; ++c)
        for (int y = 0; y < record.origHeight; ++y)
            for (int x = 0; x < record.origWidth; ++x)
                out.at(c, y, x) = padded.at(c, y + border, x + border);
    return out;
}

TileBinarizer modelBinarizer(gan::DdganModel& model) {
    return [&model](const jpeg::JpegStream& stream, const PixelImage&) {
        const jpeg::DecodedCoefficients coeffs = jpeg::partialDecode(stream);
        const PixelImage prob = gan::generatorProbImage(
            model, gan::coefficientGrid(coeffs.components.at(0)));
        return gan::thresholdBinarize(prob);
    };
}

namespace {

PixelImage cropToRecord(const PixelImage& padded, const data::DocumentRecord& record,
                        int border) {
    PixelImage out(record.origWidth, record.origHeight, padded.components);
    for (int c = 0; c < padded.components; ++c)
        for (int y = 0; y < record.origHeight; ++y)
            for (int x = 0; x < record.origWidth; ++x)
                out.at(c, y, x) = padded.at(c, y + border, x + border);
    return out;
}

// "Compressed domain" comparison: both maps re-encoded at the corpus quality
// on the padded grid (8-aligned by construction), decoded, then compared over
// the original document region.
double compressedPsnr(const PixelImage& outPadded, const PixelImage& gtPadded,
                      const data::DocumentRecord& record, int border, int quality) {
    const PixelImage outDec = jpeg::decodeImage(jpeg::encodeImage(outPadded, quality));
    const PixelImage gtDec = jpeg::decodeImage(jpeg::encodeImage(gtPadded, quality));
    return psnr(cropToRecord(outDec, record, border), cropToRecord(gtDec, record, border));
}

} // namespace

MetricReport evaluateCorpus(const data::DatasetManifest& manifest,
                            const std::filesystem::path& manifestDir, const std::string& split,
                            const TileBinarizer& binarizer) {
    MetricReport report;

    std::vector<const data::DocumentRecord*> records;
    for (const auto& r : manifest.records)
        if (r.split == split) records.push_back(&r);
    if (records.empty()) throw Error("evaluateCorpus: split '" + split + "' is empty");

    for (const auto* record : records) {
        std::vector<data::Tile> outTiles;
        std::vector<data::Tile> gtTiles;
        for (const data::TileRef& ref : manifest.tiles) {
            if (ref.docId != record->id) continue;
            jpeg::JpegStream stream{readFile(manifestDir / ref.jpgPath)};
            const PixelImage gtTile = decodePnm(readFile(manifestDir / ref.gtPath));
            outTiles.push_back({ref.row, ref.col, binarizer(stream, gtTile)});
            gtTiles.push_back({ref.row, ref.col, gtTile});
        }

        const PixelImage outPadded = data::assembleTiles(outTiles, manifest.tileSize,
                                                         record->paddedWidth,
                                                         record->paddedHeight);
        const PixelImage gtPadded = data::assembleTiles(gtTiles, manifest.tileSize,
                                                        record->paddedWidth,
                                                        record->paddedHeight);
        const PixelImage outDoc = cropToRecord(outPadded, *record, manifest.border);
        const PixelImage gtDoc = cropToRecord(gtPadded, *record, manifest.border);

        DocumentMetrics metrics;
        metrics.docId = record->id;
        metrics.mseValue = mse(outDoc, gtDoc);
        metrics.psnrDecompressed = psnr(outDoc, gtDoc);
        metrics.psnrCompressed =
            compressedPsnr(outPadded, gtPadded, *record, manifest.border, manifest.quality);
        metrics.accuracy = pixelAccuracy(outDoc, gtDoc);
        report.documents.push_back(std::move(metrics));
    }

    double sumD = 0, sumC = 0, sumA = 0;
    for (const auto& d : report.documents) {
        sumD += d.psnrDecompressed;
        sumC += d.psnrCompressed;
        sumA += d.accuracy;
    }
    const double n = static_cast<double>(report.documents.size());
    report.meanPsnrDecompressed = sumD / n;
    report.meanPsnrCompressed = sumC / n;
    report.meanAccuracy = sumA / n;
    return report;
}

namespace {

std::string num(double v) {
    if (std::isinf(v)) return "\"inf\"";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

std::string metricReportJsonl(const MetricReport& report) {
    std::ostringstream out;
    for (const auto& d : report.documents)
        out << "{\"doc\":\"" << d.docId << "\",\"mse\":" << num(d.mseValue)
            << ",\"psnr_decompressed\":" << num(d.psnrDecompressed)
            << ",\"psnr_compressed\":" << num(d.psnrCompressed)
            << ",\"accuracy\":" << num(d.accuracy) << "}\n";
    out << "{\"mean_psnr_decompressed\":" << num(report.meanPsnrDecompressed)
        << ",\"mean_psnr_compressed\":" << num(report.meanPsnrCompressed)
        << ",\"mean_accuracy\":" << num(report.meanAccuracy) << "}\n";
    return out.str();
}

std::string metricReportTable(const MetricReport& report) {
    std::ostringstream out;
    out << "document              PSNR(dB)   PSNR-comp(dB)  accuracy\n";
    auto cell = [](double v) {
        if (std::isinf(v)) return std::string("inf");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };
    for (const auto& d : report.documents) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-20s  %9s  %13s  %7.4f\n", d.docId.c_str(),
                      cell(d.psnrDecompressed).c_str(), cell(d.psnrCompressed).c_str(),
                      d.accuracy);
        out << line;
    }
    char line[160];
    std::snprintf(line, sizeof(line), "%-20s  %9s  %13s  %7.4f\n", "mean",
                  cell(report.meanPsnrDecompressed).c_str(),
                  cell(report.meanPsnrCompressed).c_str(), report.meanAccuracy);
    out << line;
    return out.str();
}

} // namespace cdbin::eval
