#include "cdbin/eval/bench.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <sstream>

namespace cdbin::eval {

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

using Clock = std::chrono::steady_clock;

VariantTiming runVariant(const std::string& name, bool pixelVariant,
                         const std::vector<data::TilePair>& pairs,
                         const std::vector<int>& order, const gan::TrainConfig& cfgIn,
                         int epochs) {
    gan::TrainConfig cfg = cfgIn;
    cfg.model.generator.pixelInput = pixelVariant;

    gan::DdganModel model(cfg.model);
    gan::GanOptimizers opts(model, cfg);

    VariantTiming t;
    t.name = name;
    std::size_t totalBytes = 0;
    long batches = 0;

    const auto start = Clock::now();
    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (std::size_t at = 0; at < order.size(); at += cfg.batchSize) {
            std::vector<gan::Sample> batchSamples;
            std::size_t batchBytes = 0;
            for (std::size_t i = at; i < std::min(order.size(), at + std::size_t(cfg.batchSize));
                 ++i) {
                const data::TilePair& p = pairs[order[i]];
                if (pixelVariant) {
                    batchBytes += static_cast<std::size_t>(p.groundTruth.width) *
                                  p.groundTruth.height; // decoded 8-bit pixel payload
                    batchSamples.push_back(gan::makePixelSample(p));
                } else {
                    batchBytes += p.stream.bytes.size(); // compressed payload
                    batchSamples.push_back(gan::makeSample(p));
                }
            }
            std::vector<const gan::Sample*> batch;
            for (const auto& s : batchSamples) batch.push_back(&s);
            gan::trainStep(model, opts, batch, cfg);
            totalBytes += batchBytes;
            ++batches;
            ++t.steps;
        }
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();

    t.secondsPerEpoch = seconds / epochs;
    t.imagesPerSecond = seconds > 0 ? double(order.size()) * epochs / seconds : 0.0;
    t.totalInputBytes = totalBytes;
    t.bytesPerBatch = batches > 0 ? totalBytes / static_cast<std::size_t>(batches) : 0;
    return t;
}

} // namespace

BenchmarkReport benchmark(const data::DatasetManifest& manifest,
                          const std::filesystem::path& manifestDir, const gan::TrainConfig& cfg,
                          int epochs) {
    cfg.validate();
    const std::vector<data::TilePair> pairs = data::loadTilePairs(manifest, manifestDir, "train");
    if (pairs.empty()) throw Error("benchmark: train split has no tiles");

    std::vector<int> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::mt19937_64 rng(cfg.seed);
    std::shuffle(order.begin(), order.end(), rng);

    BenchmarkReport report;
    report.sampleOrder = order;
    report.epochs = epochs;
    report.tileCount = static_cast<int>(pairs.size());
    report.configHash = fnv1a64(gan::trainConfigToJson(cfg));
    report.compressed = runVariant("compressed", false, pairs, order, cfg, epochs);
    report.pixel = runVariant("pixel", true, pairs, order, cfg, epochs);
    return report;
}

std::string benchmarkReportJson(const BenchmarkReport& report) {
    std::ostringstream out;
    auto variant = [&](const VariantTiming& t) {
        std::ostringstream v;
        v << "{\"name\":\"" << t.name << "\",\"seconds_per_epoch\":" << t.secondsPerEpoch
          << ",\"images_per_second\":" << t.imagesPerSecond
          << ",\"bytes_per_batch\":" << t.bytesPerBatch << ",\"steps\":" << t.steps << "}";
        return v.str();
    };
    out << "{\"config_hash\":\"" << std::hex << report.configHash << std::dec << "\""
        << ",\"epochs\":" << report.epochs << ",\"tiles\":" << report.tileCount
        << ",\"compressed\":" << variant(report.compressed)
        << ",\"pixel\":" << variant(report.pixel) << "}";
    return out.str();
}

} // namespace cdbin::eval
