#include "cdbin/eval/metrics.hpp"

#include <cmath>
#include <limits>

namespace cdbin::eval {

namespace {

void requireSameShape(const PixelImage& a, const PixelImage& b, const char* op) {
    if (a.width != b.width || a.height != b.height || a.components != b.components)
        throw Error(std::string(op) + ": image shapes differ");
}

} // namespace

double mse(const PixelImage& a, const PixelImage& b) {
    requireSameShape(a, b, "mse");
    double acc = 0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        const double d = double(a.samples[i]) - double(b.samples[i]);
        acc += d * d;
    }
    return acc / double(a.samples.size());
}

double psnr(const PixelImage& a, const PixelImage& b) {
    const double m = mse(a, b);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / m);
}

double pixelAccuracy(const PixelImage& a, const PixelImage& b) {
    requireSameShape(a, b, "pixelAccuracy");
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        if (a.samples[i] == b.samples[i]) ++same;
    return double(same) / double(a.samples.size());
}

} // namespace cdbin::eval
