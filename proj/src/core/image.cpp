#include "cdbin/image.hpp"

#include <cctype>
#include <fstream>

namespace cdbin {

PixelImage::PixelImage(int w, int h, int comps, std::uint8_t fill)
    : width(w), height(h), components(comps),
      samples(static_cast<std::size_t>(w) * h * comps, fill) {
    if (w <= 0 || h <= 0 || (comps != 1 && comps != 3))
        throw Error("PixelImage: bad dimensions " + std::to_string(w) + "x" + std::to_string(h) +
                    " with " + std::to_string(comps) + " components");
}

std::vector<std::uint8_t> readFile(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void writeFile(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed: " + path.string());
}

namespace {

// Skips whitespace and '#' comments between PNM header tokens.
std::size_t nextToken(const std::vector<std::uint8_t>& b, std::size_t pos, std::string& tok) {
    while (pos < b.size()) {
        if (std::isspace(b[pos])) {
            ++pos;
        } else if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    tok.clear();
    while (pos < b.size() && !std::isspace(b[pos])) tok.push_back(static_cast<char>(b[pos++]));
    if (tok.empty()) throw Error("PNM: truncated header");
    return pos;
}

} // namespace

PixelImage decodePnm(const std::vector<std::uint8_t>& bytes) {
    std::string tok;
    std::size_t pos = nextToken(bytes, 0, tok);
    int comps;
    if (tok == "P5") comps = 1;
    else if (tok == "P6") comps = 3;
    else throw Error("PNM: unsupported magic '" + tok + "' (need binary P5/P6)");

    pos = nextToken(bytes, pos, tok);
    int w = std::stoi(tok);
    pos = nextToken(bytes, pos, tok);
    int h = std::stoi(tok);
    pos = nextToken(bytes, pos, tok);
    int maxval = std::stoi(tok);
    if (maxval != 255) throw Error("PNM: only maxval 255 supported");
    ++pos; // single whitespace after maxval

    PixelImage img(w, h, comps);
    std::size_t need = img.planeSize() * comps;
    if (bytes.size() - pos < need) throw Error("PNM: truncated pixel data");

    // File data is interleaved; storage is planar.
    const std::uint8_t* src = bytes.data() + pos;
    for (std::size_t i = 0; i < img.planeSize(); ++i)
        for (int c = 0; c < comps; ++c)
            img.samples[c * img.planeSize() + i] = src[i * comps + c];
    return img;
}

std::vector<std::uint8_t> encodePnm(const PixelImage& img) {
    std::string header = (img.components == 1 ? "P5\n" : "P6\n") + std::to_string(img.width) +
                         " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + img.samples.size());
    for (std::size_t i = 0; i < img.planeSize(); ++i)
        for (int c = 0; c < img.components; ++c)
            out.push_back(img.samples[c * img.planeSize() + i]);
    return out;
}

PixelImage readPnm(const std::filesystem::path& path) { return decodePnm(readFile(path)); }

void writePnm(const PixelImage& img, const std::filesystem::path& path) {
    writeFile(path, encodePnm(img));
}

} // namespace cdbin
