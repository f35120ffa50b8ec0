#include "cdbin/jpeg/color.hpp"

namespace cdbin::jpeg {

PixelImage rgbToYcbcr(const PixelImage& img) {
    if (img.components != 3) throw Error("rgbToYcbcr: 3-component input required");

    PixelImage out(img.width, img.height, 3);
    const std::size_t n = img.planeSize();
    const std::uint8_t* r = img.plane(0);
    const std::uint8_t* g = img.plane(1);
    const std::uint8_t* b = img.plane(2);
    for (std::size_t i = 0; i < n; ++i) {
        out.plane(0)[i] = clampToByte(0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i]);
        out.plane(1)[i] = clampToByte(128.0 - 0.168736 * r[i] - 0.331264 * g[i] + 0.5 * b[i]);
        out.plane(2)[i] = clampToByte(128.0 + 0.5 * r[i] - 0.418688 * g[i] - 0.081312 * b[i]);
    }
    return out;
}

PixelImage ycbcrToRgb(const PixelImage& img) {
    if (img.components != 3) throw Error("ycbcrToRgb: 3-component input required");

    PixelImage out(img.width, img.height, 3);
    const std::size_t n = img.planeSize();
    const std::uint8_t* y = img.plane(0);
    const std::uint8_t* cb = img.plane(1);
    const std::uint8_t* cr = img.plane(2);
    for (std::size_t i = 0; i < n; ++i) {
        const double dcb = cb[i] - 128.0;
        const double dcr = cr[i] - 128.0;
        out.plane(0)[i] = clampToByte(y[i] + 1.402 * dcr);
        out.plane(1)[i] = clampToByte(y[i] - 0.344136 * dcb - 0.714136 * dcr);
        out.plane(2)[i] = clampToByte(y[i] + 1.772 * dcb);
    }
    return out;
}

} // namespace cdbin::jpeg
