#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdbin {

/// Base error type for the whole toolkit. Subcommands map it to exit code 2.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// 8-bit raster image with 1 (gray) or 3 (RGB / YCbCr) components.
/// Samples are stored planar: component c occupies samples[c*W*H .. (c+1)*W*H).
struct PixelImage {
    int width = 0;
    int height = 0;
    int components = 1;
    std::vector<std::uint8_t> samples;

    PixelImage() = default;
    PixelImage(int w, int h, int comps, std::uint8_t fill = 0);

    std::size_t planeSize() const { return static_cast<std::size_t>(width) * height; }

    std::uint8_t at(int comp, int y, int x) const {
        return samples[comp * planeSize() + static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int comp, int y, int x) {
        return samples[comp * planeSize() + static_cast<std::size_t>(y) * width + x];
    }

    const std::uint8_t* plane(int comp) const { return samples.data() + comp * planeSize(); }
    std::uint8_t* plane(int comp) { return samples.data() + comp * planeSize(); }

    bool operator==(const PixelImage&) const = default;
};

inline std::uint8_t clampToByte(double v) {
    if (v <= 0.0) return 0;
    if (v >= 255.0) return 255;
    return static_cast<std::uint8_t>(v + 0.5);
}

/// Reads a binary PGM (P5) or PPM (P6) file, maxval 255.
PixelImage readPnm(const std::filesystem::path& path);

/// Writes PGM for 1-component images, PPM for 3-component ones.
void writePnm(const PixelImage& img, const std::filesystem::path& path);

/// In-memory PNM codecs used by the file helpers above.
PixelImage decodePnm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encodePnm(const PixelImage& img);

std::vector<std::uint8_t> readFile(const std::filesystem::path& path);
void writeFile(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

} // namespace cdbin
