#include "medc/image.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace medc {

ImageBuffer make_image(int width, int height, int channels, std::uint8_t fill) {
    ImageBuffer img;
    img.width = width;
    img.height = height;
    img.channels = channels;
    if (width > 0 && height > 0 && (channels == 1 || channels == 3)) {
        img.data.assign(img.sample_count(), fill);
    }
    validate(img);
    return img;
}

void validate(const ImageBuffer& img) {
    if (img.width <= 0 || img.height <= 0) {
        throw DataError("image dimensions must be positive, got " + std::to_string(img.width) +
                        "x" + std::to_string(img.height));
    }
    if (img.channels != 1 && img.channels != 3) {
        throw DataError("image channels must be 1 or 3, got " + std::to_string(img.channels));
    }
    if (img.data.size() != img.sample_count()) {
        throw DataError("image data length " + std::to_string(img.data.size()) +
                        " does not match " + std::to_string(img.sample_count()));
    }
}

FloatImage to_float(const ImageBuffer& img) {
    FloatImage out;
    out.width = img.width;
    out.height = img.height;
    out.channels = img.channels;
    out.data.resize(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        out.data[i] = static_cast<float>(img.data[i]) / 255.0f;
    }
    return out;
}

std::uint8_t quantize(float v) {
    if (!(v > 0.0f)) return 0;  // NaN goes to 0 as well
    if (v >= 1.0f) return 255;
    // Half away from zero; lroundf implements it independent of the FP
    // rounding mode, which keeps the rule platform-stable.
    return static_cast<std::uint8_t>(std::lroundf(v * 255.0f));
}

ImageBuffer to_bytes(const FloatImage& img) {
    ImageBuffer out;
    out.width = img.width;
    out.height = img.height;
    out.channels = img.channels;
    out.data.resize(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        out.data[i] = quantize(img.data[i]);
    }
    validate(out);
    return out;
}

double mse(const ImageBuffer& a, const ImageBuffer& b) {
    if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
        throw DataError("mse: image shapes differ");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = (static_cast<double>(a.data[i]) - static_cast<double>(b.data[i])) / 255.0;
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
    const double m = mse(a, b);
    if (m <= 0.0) return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(m);
}

}  // namespace medc
