#include "cdbin/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

namespace cdbin::data {

namespace {

struct Point {
    double x, y;
};

void stampDot(std::vector<double>& ink, int w, int h, double cx, double cy, double radius) {
    const int x0 = std::max(0, static_cast<int>(cx - radius - 1));
    const int x1 = std::min(w - 1, static_cast<int>(cx + radius + 1));
    const int y0 = std::max(0, static_cast<int>(cy - radius - 1));
    const int y1 = std::min(h - 1, static_cast<int>(cy + radius + 1));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double d = std::hypot(x - cx, y - cy);
            if (d <= radius) ink[static_cast<std::size_t>(y) * w + x] = 1.0;
        }
}

void drawStroke(std::vector<double>& ink, int w, int h, Point a, Point b, Point c,
                double thickness) {
    const double len = std::hypot(b.x - a.x, b.y - a.y) + std::hypot(c.x - b.x, c.y - b.y);
    const int steps = std::max(4, static_cast<int>(len * 2));
    for (int s = 0; s <= steps; ++s) {
        const double t = static_cast<double>(s) / steps;
        const double u = 1.0 - t;
        const double x = u * u * a.x + 2 * u * t * b.x + t * t * c.x;
        const double y = u * u * a.y + 2 * u * t * b.y + t * t * c.y;
        stampDot(ink, w, h, x, y, thickness / 2.0);
    }
}

// Separable [1 2 1]/4 blur, one pass per axis.
std::vector<double> blur3(const std::vector<double>& src, int w, int h) {
    std::vector<double> tmp(src.size()), out(src.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const auto at = [&](int xx) {
                xx = std::clamp(xx, 0, w - 1);
                return src[static_cast<std::size_t>(y) * w + xx];
            };
            tmp[static_cast<std::size_t>(y) * w + x] = (at(x - 1) + 2 * at(x) + at(x + 1)) / 4.0;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const auto at = [&](int yy) {
                yy = std::clamp(yy, 0, h - 1);
                return tmp[static_cast<std::size_t>(yy) * w + x];
            };
            out[static_cast<std::size_t>(y) * w + x] = (at(y - 1) + 2 * at(y) + at(y + 1)) / 4.0;
        }
    return out;
}

} // namespace

SyntheticDoc synthDocument(int width, int height, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Paper: base tone with smooth undulation and a little grain.
    std::vector<double> paper(static_cast<std::size_t>(width) * height);
    const double base = 205.0 + 30.0 * unit(rng);
    const double fx = (0.5 + unit(rng)) * 2.0 * std::acos(-1.0) / width;
    const double fy = (0.5 + unit(rng)) * 2.0 * std::acos(-1.0) / height;
    const double phase1 = unit(rng) * 6.28, phase2 = unit(rng) * 6.28;
    std::uniform_real_distribution<double> grain(-1.5, 1.5);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            paper[static_cast<std::size_t>(y) * width + x] =
                base + 8.0 * std::sin(fx * x + phase1) + 6.0 * std::cos(fy * y + phase2) +
                grain(rng);

    // Stains darken the paper but never enter the ground truth.
    const int stains = static_cast<int>(unit(rng) * 3.0);
    for (int s = 0; s < stains; ++s) {
        const double cx = unit(rng) * width, cy = unit(rng) * height;
        const double rx = 12 + unit(rng) * (width / 6.0), ry = 12 + unit(rng) * (height / 6.0);
        const double strength = 25.0 + unit(rng) * 45.0;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                const double d = std::pow((x - cx) / rx, 2) + std::pow((y - cy) / ry, 2);
                if (d < 1.0)
                    paper[static_cast<std::size_t>(y) * width + x] -= strength * (1.0 - d);
            }
    }

    // Text: rows of short quadratic strokes grouped into words. Density and
    // stroke widths match a handwriting scan at this resolution.
    std::vector<double> ink(static_cast<std::size_t>(width) * height, 0.0);
    const int lineHeight = 28;
    std::uniform_real_distribution<double> jitter(-2.0, 2.0);
    for (int rowTop = 10; rowTop + lineHeight < height - 8; rowTop += lineHeight + 14) {
        if (unit(rng) < 0.15) continue; // occasional blank line
        double x = 6.0 + unit(rng) * 20.0;
        while (x < width - 20.0) {
            const int glyphs = 2 + static_cast<int>(unit(rng) * 4.0); // one word
            for (int gl = 0; gl < glyphs && x < width - 16.0; ++gl) {
                const double gw = 8.0 + unit(rng) * 7.0;
                const double top = rowTop + 2 + unit(rng) * 4.0;
                const double bottom = rowTop + lineHeight - 4 + jitter(rng);
                Point a{x + jitter(rng), top + jitter(rng)};
                Point c{x + gw + jitter(rng), bottom};
                Point b{x + gw * unit(rng), (top + bottom) / 2 + 3.0 * jitter(rng)};
                drawStroke(ink, width, height, a, b, c, 2.8 + unit(rng) * 2.4);
                if (unit(rng) < 0.4) { // cross bar
                    Point a2{x, (top + bottom) / 2 + jitter(rng)};
                    Point c2{x + gw, (top + bottom) / 2 + jitter(rng)};
                    Point b2{x + gw / 2, (top + bottom) / 2 + jitter(rng)};
                    drawStroke(ink, width, height, a2, b2, c2, 2.0 + unit(rng));
                }
                x += gw + 4.0;
            }
            x += 14.0 + unit(rng) * 16.0; // word gap
        }
    }

    const std::vector<double> inkSoft = blur3(blur3(ink, width, height), width, height);

    SyntheticDoc out;
    out.groundTruth = PixelImage(width, height, 1);
    for (std::size_t i = 0; i < ink.size(); ++i)
        out.groundTruth.samples[i] = ink[i] > 0.5 ? 0 : 255;

    std::uniform_real_distribution<double> inkTone(15.0, 60.0);
    const double tone = inkTone(rng);
    std::vector<double> composite(paper.size());
    for (std::size_t i = 0; i < paper.size(); ++i)
        composite[i] = paper[i] * (1.0 - inkSoft[i]) + tone * inkSoft[i];
    const std::vector<double> blurred = blur3(blur3(composite, width, height), width, height);

    out.document = PixelImage(width, height, 1);
    for (std::size_t i = 0; i < blurred.size(); ++i)
        out.document.samples[i] = clampToByte(blurred[i]);
    return out;
}

void writeSyntheticCorpus(const std::filesystem::path& docsDir,
                          const std::filesystem::path& gtDir, int count, int width, int height,
                          std::uint64_t seed) {
    std::filesystem::create_directories(docsDir);
    std::filesystem::create_directories(gtDir);
    for (int i = 0; i < count; ++i) {
        const SyntheticDoc doc = synthDocument(width, height, seed + static_cast<std::uint64_t>(i));
        char name[32];
        std::snprintf(name, sizeof(name), "doc_%03d.pgm", i);
        writePnm(doc.document, docsDir / name);
        writePnm(doc.groundTruth, gtDir / name);
    }
}

} // namespace cdbin::data
