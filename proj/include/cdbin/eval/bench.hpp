#pragma once

#include "cdbin/data/dataset.hpp"
#include "cdbin/gan/train.hpp"

namespace cdbin::eval {

struct VariantTiming {
    std::string name;
    double secondsPerEpoch = 0;
    double imagesPerSecond = 0;
    std::size_t bytesPerBatch = 0;   // mean input payload per batch, measured
    std::size_t totalInputBytes = 0; // sum over all batches; compressed = sum of JFIF sizes
    long steps = 0;
};

struct BenchmarkReport {
    VariantTiming compressed; // partial decode -> coefficient grids
    VariantTiming pixel;      // full decode -> 256x256x1 maps, matched widths
    std::vector<int> sampleOrder; // tile order processed (same for both variants)
    std::uint64_t configHash = 0;
    int epochs = 1;
    int tileCount = 0;
};

std::uint64_t fnv1a64(const std::string& text);

/// Trains both pipeline variants for `epochs` epochs over the train split and
/// measures wall time and input bytes. Input decoding happens inside the
/// timed region; the architectures share widths and differ only in the input
/// stage. Sample order is seeded and identical across runs and variants.
BenchmarkReport benchmark(const data::DatasetManifest& manifest,
                          const std::filesystem::path& manifestDir, const gan::TrainConfig& cfg,
                          int epochs);

std::string benchmarkReportJson(const BenchmarkReport& report);

} // namespace cdbin::eval
