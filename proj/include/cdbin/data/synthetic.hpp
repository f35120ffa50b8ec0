#pragma once

#include <cstdint>
#include <filesystem>

#include "cdbin/image.hpp"

namespace cdbin::data {

/// A generated degraded document page with its clean binary ground truth
/// (text black 0, background white 255). Deterministic for a given seed.
struct SyntheticDoc {
    PixelImage document;
    PixelImage groundTruth;
};

/// Renders pseudo-text strokes on a noisy paper background with stains and a
/// light blur, mimicking a scanned manuscript.
SyntheticDoc synthDocument(int width, int height, std::uint64_t seed);

/// Writes `count` synthetic documents as PGM files (doc_000.pgm, ...) into docsDir
/// with matching ground truth in gtDir. Used for demos and self-tests.
void writeSyntheticCorpus(const std::filesystem::path& docsDir,
                          const std::filesystem::path& gtDir, int count, int width, int height,
                          std::uint64_t seed);

} // namespace cdbin::data
