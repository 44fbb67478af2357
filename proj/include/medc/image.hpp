#pragma once

#include <cstdint>
#include <vector>

#include "medc/errors.hpp"

namespace medc {

/// H x W x C raster with 8-bit interleaved samples, row-major.
/// Channels are 1 (grayscale modalities) or 3 (RGB modalities).
struct ImageBuffer {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> data;

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    std::size_t sample_count() const { return pixel_count() * channels; }

    std::uint8_t& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    bool operator==(const ImageBuffer&) const = default;
};

/// Working representation used inside kernels: float samples, nominally in
/// [0,1]. Values may leave the range mid-computation; to_bytes clamps.
struct FloatImage {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<float> data;

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    std::size_t sample_count() const { return pixel_count() * channels; }

    float& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    float at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
};

/// Allocates a w x h x c image filled with `fill`. Throws DataError on
/// invalid dimensions or channel count.
ImageBuffer make_image(int width, int height, int channels, std::uint8_t fill = 0);

/// Checks the ImageBuffer invariants (dims positive, channels in {1,3},
/// data length == w*h*c). Throws DataError.
void validate(const ImageBuffer& img);

FloatImage to_float(const ImageBuffer& img);

/// Clamps to [0,1], scales by 255 and rounds half away from zero.
/// to_bytes(to_float(img)) == img bit-exactly.
ImageBuffer to_bytes(const FloatImage& img);

/// Single-sample version of the to_bytes rule.
std::uint8_t quantize(float v);

/// Mean squared error in [0,1] units. Images must have identical shape.
double mse(const ImageBuffer& a, const ImageBuffer& b);

/// Peak signal-to-noise ratio in dB (infinity for identical images).
double psnr(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace medc
