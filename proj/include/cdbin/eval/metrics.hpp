#pragma once

#include "cdbin/image.hpp"

namespace cdbin::eval {

/// Mean squared difference over all samples; shapes must match.
double mse(const PixelImage& a, const PixelImage& b);

/// 10*log10(255^2 / MSE), +infinity for identical images.
double psnr(const PixelImage& a, const PixelImage& b);

/// Fraction of exactly equal samples.
double pixelAccuracy(const PixelImage& a, const PixelImage& b);

} // namespace cdbin::eval
