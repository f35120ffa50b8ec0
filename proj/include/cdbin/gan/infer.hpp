#pragma once

#include "cdbin/data/dataset.hpp"
#include "cdbin/gan/model.hpp"

namespace cdbin::gan {

/// Generator probability map for one coefficient grid, scaled to a [0,255]
/// grayscale image.
PixelImage generatorProbImage(DdganModel& model, const Tensorf& grid);

/// value > 127 -> 255 else 0.
PixelImage thresholdBinarize(const PixelImage& map, int threshold = 127);

struct BinarizeOptions {
    int tileSize = 256;
    // Crop applied after reassembly; zero width/height means "whole padded map".
    int border = 0;
    int cropWidth = 0;
    int cropHeight = 0;
};

/// End-to-end compressed-domain inference over one document stream: partial
/// decode, per-tile generator passes (the stream is never pixel-decoded),
/// thresholding, reassembly, and crop. The coefficient grid is padded with
/// quantized black blocks up to whole tiles when needed.
PixelImage binarizeStream(const jpeg::JpegStream& stream, DdganModel& model,
                          const BinarizeOptions& opts = {});

} // namespace cdbin::gan
