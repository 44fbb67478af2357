#include "medc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "medc/codec.hpp"
#include "medc/registry.hpp"

namespace medc {

double KernelParams::get(std::string_view name) const {
    auto it = values_.find(std::string(name));
    if (it == values_.end()) {
        throw ParamError("missing kernel parameter: " + std::string(name));
    }
    return it->second;
}

double KernelParams::get_or(std::string_view name, double fallback) const {
    auto it = values_.find(std::string(name));
    return it == values_.end() ? fallback : it->second;
}

int KernelParams::get_int(std::string_view name) const {
    const double v = get(name);
    const double r = std::nearbyint(v);
    if (std::abs(v - r) > 1e-9) {
        throw ParamError("parameter " + std::string(name) + " must be integral, got " +
                         std::to_string(v));
    }
    return static_cast<int>(r);
}

namespace {

// Reflect-101 border indexing: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i = std::abs(i) % period;
    return i < n ? i : period - i;
}

float clampf(float v, float lo, float hi) { return v < lo ? lo : (v > hi ? hi : v); }

// 2D convolution with an explicit tap list, reflect padding. Taps must be
// normalized by the caller. Interior pixels skip the reflect arithmetic.
struct Tap {
    int dx;
    int dy;
    float w;
};

FloatImage convolve(const FloatImage& in, const std::vector<Tap>& taps, int reach) {
    const int w = in.width, h = in.height, ch = in.channels;
    FloatImage out;
    out.width = w;
    out.height = h;
    out.channels = ch;
    out.data.assign(in.data.size(), 0.0f);

    const float* src = in.data.data();
    float* dst = out.data.data();
    const std::size_t row_stride = static_cast<std::size_t>(w) * ch;

    for (int y = 0; y < h; ++y) {
        const bool y_interior = y >= reach && y + reach < h;
        for (int x = 0; x < w; ++x) {
            const bool interior = y_interior && x >= reach && x + reach < w;
            float acc[3] = {0.0f, 0.0f, 0.0f};
            if (interior) {
                for (const Tap& t : taps) {
                    const float* p = src + (static_cast<std::size_t>(y + t.dy) * w + (x + t.dx)) * ch;
                    for (int c = 0; c < ch; ++c) acc[c] += t.w * p[c];
                }
            } else {
                for (const Tap& t : taps) {
                    const int sy = reflect_index(y + t.dy, h);
                    const int sx = reflect_index(x + t.dx, w);
                    const float* p = src + (static_cast<std::size_t>(sy) * w + sx) * ch;
                    for (int c = 0; c < ch; ++c) acc[c] += t.w * p[c];
                }
            }
            float* q = dst + static_cast<std::size_t>(y) * row_stride + static_cast<std::size_t>(x) * ch;
            for (int c = 0; c < ch; ++c) q[c] = acc[c];
        }
    }
    return out;
}

std::vector<float> gaussian_weights(double sigma, int radius) {
    std::vector<float> weights(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        weights[i + radius] = static_cast<float>(v);
        sum += v;
    }
    for (auto& v : weights) v = static_cast<float>(v / sum);
    return weights;
}

FloatImage separable_pass(const FloatImage& in, const std::vector<float>& weights, bool horizontal) {
    const int w = in.width, h = in.height, ch = in.channels;
    const int radius = static_cast<int>(weights.size() / 2);
    FloatImage out = in;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                float acc = 0.0f;
                if (horizontal) {
                    for (int k = -radius; k <= radius; ++k) {
                        acc += weights[k + radius] * in.at(reflect_index(x + k, w), y, c);
                    }
                } else {
                    for (int k = -radius; k <= radius; ++k) {
                        acc += weights[k + radius] * in.at(x, reflect_index(y + k, h), c);
                    }
                }
                out.at(x, y, c) = acc;
            }
        }
    }
    return out;
}

// Bilinear read at a real-valued position; out-of-range corners reflect.
void bilinear_accumulate(const FloatImage& img, double sx, double sy, float weight, float* acc) {
    const int x0 = static_cast<int>(std::floor(sx));
    const int y0 = static_cast<int>(std::floor(sy));
    const float fx = static_cast<float>(sx - x0);
    const float fy = static_cast<float>(sy - y0);
    const int xs[2] = {reflect_index(x0, img.width), reflect_index(x0 + 1, img.width)};
    const int ys[2] = {reflect_index(y0, img.height), reflect_index(y0 + 1, img.height)};
    const float wx[2] = {1.0f - fx, fx};
    const float wy[2] = {1.0f - fy, fy};
    for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 2; ++i) {
            const float w = weight * wy[j] * wx[i];
            if (w == 0.0f) continue;
            const float* p =
                img.data.data() + (static_cast<std::size_t>(ys[j]) * img.width + xs[i]) * img.channels;
            for (int c = 0; c < img.channels; ++c) acc[c] += w * p[c];
        }
    }
}

void rgb_to_hsv(float r, float g, float b, float& h, float& s, float& v) {
    const float mx = std::max({r, g, b});
    const float mn = std::min({r, g, b});
    const float d = mx - mn;
    v = mx;
    s = mx > 0.0f ? d / mx : 0.0f;
    if (d <= 0.0f) {
        h = 0.0f;
        return;
    }
    if (mx == r) {
        h = (g - b) / d;
    } else if (mx == g) {
        h = (b - r) / d + 2.0f;
    } else {
        h = (r - g) / d + 4.0f;
    }
    if (h < 0.0f) h += 6.0f;
}

void hsv_to_rgb(float h, float s, float v, float& r, float& g, float& b) {
    const float c = v * s;
    const float hp = h;
    const float x = c * (1.0f - std::abs(std::fmod(hp, 2.0f) - 1.0f));
    const float m = v - c;
    float rr = 0, gg = 0, bb = 0;
    if (hp < 1.0f) {
        rr = c; gg = x;
    } else if (hp < 2.0f) {
        rr = x; gg = c;
    } else if (hp < 3.0f) {
        gg = c; bb = x;
    } else if (hp < 4.0f) {
        gg = x; bb = c;
    } else if (hp < 5.0f) {
        rr = x; bb = c;
    } else {
        rr = c; bb = x;
    }
    r = rr + m;
    g = gg + m;
    b = bb + m;
}

// 5x7 bitmap font, digits then A-Z. Bit 4 of each row byte is the leftmost
// column.
constexpr std::uint8_t kFont5x7[36][7] = {
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},  // 0
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},  // 1
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},  // 2
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},  // 3
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},  // 4
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},  // 5
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},  // 6
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},  // 8
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},  // 9
    {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11},  // A
    {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E},  // B
    {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E},  // C
    {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C},  // D
    {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F},  // E
    {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10},  // F
    {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F},  // G
    {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11},  // H
    {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E},  // I
    {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C},  // J
    {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11},  // K
    {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F},  // L
    {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11},  // M
    {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11},  // N
    {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E},  // O
    {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10},  // P
    {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D},  // Q
    {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11},  // R
    {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E},  // S
    {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04},  // T
    {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E},  // U
    {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04},  // V
    {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A},  // W
    {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11},  // X
    {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04},  // Y
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F},  // Z
};

// Stain rendering constants (hematoxylin-like deposit).
constexpr float kStainColor[3] = {70.0f / 255.0f, 30.0f / 255.0f, 90.0f / 255.0f};
constexpr float kStainAlpha = 0.85f;
constexpr float kStainFalloffSigma = 0.45f;

// Bubble rendering constants.
constexpr float kBubbleAlpha = 0.7f;
constexpr float kBubbleInteriorGain = 1.15f;
constexpr float kBubbleRimGain = 0.80f;
constexpr float kBubbleRimStart = 0.8f;
constexpr float kBubbleEdgeWidth = 0.15f;

constexpr double kPi = 3.14159265358979323846;

void require_rgb(const ImageBuffer& img, const char* what) {
    if (img.channels != 3) {
        throw ApplicabilityError(std::string(what) + " requires a 3-channel image");
    }
}

}  // namespace

ImageBuffer jpeg_compress(const ImageBuffer& img, int quality) {
    validate(img);
    return decode_jpeg(encode_jpeg(img, quality), img.channels);
}

ImageBuffer pixelate(const ImageBuffer& img, double factor) {
    validate(img);
    if (!(factor > 0.0) || factor > 1.0) {
        throw ParamError("pixelate factor must be in (0,1], got " + std::to_string(factor));
    }
    const int sw = static_cast<int>(std::lround(img.width * factor));
    const int sh = static_cast<int>(std::lround(img.height * factor));
    if (sw < 1 || sh < 1) {
        throw ParamError("pixelate factor too small for image size");
    }

    const FloatImage in = to_float(img);
    const int w = img.width, h = img.height, ch = img.channels;

    // Horizontal area-average reduce to sw columns.
    FloatImage hred;
    hred.width = sw;
    hred.height = h;
    hred.channels = ch;
    hred.data.assign(static_cast<std::size_t>(sw) * h * ch, 0.0f);
    const double xscale = static_cast<double>(w) / sw;
    for (int j = 0; j < sw; ++j) {
        const double start = j * xscale;
        const double end = (j + 1) * xscale;
        const int k0 = static_cast<int>(std::floor(start));
        const int k1 = std::min(w - 1, static_cast<int>(std::ceil(end)) - 1);
        for (int y = 0; y < h; ++y) {
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int k = k0; k <= k1; ++k) {
                    const double overlap = std::min<double>(k + 1, end) - std::max<double>(k, start);
                    if (overlap > 0) acc += overlap * in.at(k, y, c);
                }
                hred.at(j, y, c) = static_cast<float>(acc / (end - start));
            }
        }
    }

    // Vertical reduce to sh rows.
    FloatImage small;
    small.width = sw;
    small.height = sh;
    small.channels = ch;
    small.data.assign(static_cast<std::size_t>(sw) * sh * ch, 0.0f);
    const double yscale = static_cast<double>(h) / sh;
    for (int i = 0; i < sh; ++i) {
        const double start = i * yscale;
        const double end = (i + 1) * yscale;
        const int k0 = static_cast<int>(std::floor(start));
        const int k1 = std::min(h - 1, static_cast<int>(std::ceil(end)) - 1);
        for (int x = 0; x < sw; ++x) {
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int k = k0; k <= k1; ++k) {
                    const double overlap = std::min<double>(k + 1, end) - std::max<double>(k, start);
                    if (overlap > 0) acc += overlap * hred.at(x, k, c);
                }
                small.at(x, i, c) = static_cast<float>(acc / (end - start));
            }
        }
    }

    // Nearest-neighbor upscale back to the original size.
    FloatImage out;
    out.width = w;
    out.height = h;
    out.channels = ch;
    out.data.resize(in.data.size());
    for (int y = 0; y < h; ++y) {
        const int sy = static_cast<int>(static_cast<std::int64_t>(y) * sh / h);
        for (int x = 0; x < w; ++x) {
            const int sx = static_cast<int>(static_cast<std::int64_t>(x) * sw / w);
            for (int c = 0; c < ch; ++c) out.at(x, y, c) = small.at(sx, sy, c);
        }
    }
    return to_bytes(out);
}

ImageBuffer add_noise(const ImageBuffer& img, NoiseKind kind, const KernelParams& params,
                      RngStream& rng) {
    validate(img);
    switch (kind) {
        case NoiseKind::kGaussian: {
            const double sigma = params.get("sigma");
            if (sigma < 0) throw ParamError("gaussian noise sigma must be >= 0");
            if (sigma == 0) return img;
            FloatImage f = to_float(img);
            for (auto& v : f.data) {
                v = static_cast<float>(v + rng.normal(0.0, sigma));
            }
            return to_bytes(f);
        }
        case NoiseKind::kSpeckle: {
            const double sigma = params.get("sigma");
            if (sigma < 0) throw ParamError("speckle noise sigma must be >= 0");
            if (sigma == 0) return img;
            FloatImage f = to_float(img);
            for (auto& v : f.data) {
                v = static_cast<float>(v + v * rng.normal(0.0, sigma));
            }
            return to_bytes(f);
        }
        case NoiseKind::kImpulse: {
            const double amount = params.get("amount");
            if (amount < 0 || amount > 1) throw ParamError("impulse amount must be in [0,1]");
            if (amount == 0) return img;
            ImageBuffer out = img;
            for (std::size_t p = 0; p < img.pixel_count(); ++p) {
                if (rng.uniform() < amount) {
                    const std::uint8_t v = rng.uniform() < 0.5 ? 0 : 255;
                    for (int c = 0; c < img.channels; ++c) {
                        out.data[p * img.channels + c] = v;
                    }
                }
            }
            return out;
        }
        case NoiseKind::kShot: {
            const double lam = params.get("lam");
            if (!(lam > 0)) throw ParamError("shot noise lam must be > 0");
            FloatImage f = to_float(img);
            for (auto& v : f.data) {
                v = static_cast<float>(static_cast<double>(rng.poisson(v * lam)) / lam);
            }
            return to_bytes(f);
        }
    }
    throw ParamError("unknown noise kind");
}

ImageBuffer blur(const ImageBuffer& img, BlurKind kind, const KernelParams& params,
                 RngStream& rng) {
    validate(img);
    switch (kind) {
        case BlurKind::kGaussian: {
            const double sigma = params.get("sigma");
            if (sigma < 0) throw ParamError("gaussian blur sigma must be >= 0");
            if (sigma == 0) return img;
            const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
            const auto weights = gaussian_weights(sigma, radius);
            FloatImage f = separable_pass(to_float(img), weights, /*horizontal=*/true);
            f = separable_pass(f, weights, /*horizontal=*/false);
            return to_bytes(f);
        }
        case BlurKind::kDefocus: {
            const double radius = params.get("radius");
            if (radius < 0) throw ParamError("defocus radius must be >= 0");
            const int reach = static_cast<int>(std::ceil(radius + 0.5));
            std::vector<Tap> taps;
            double sum = 0.0;
            for (int dy = -reach; dy <= reach; ++dy) {
                for (int dx = -reach; dx <= reach; ++dx) {
                    const double d = std::sqrt(static_cast<double>(dx) * dx + static_cast<double>(dy) * dy);
                    // Antialiased disk: full weight inside, linear edge.
                    const double w = std::clamp(radius + 0.5 - d, 0.0, 1.0);
                    if (w > 0) {
                        taps.push_back({dx, dy, static_cast<float>(w)});
                        sum += w;
                    }
                }
            }
            for (auto& t : taps) t.w = static_cast<float>(t.w / sum);
            return to_bytes(convolve(to_float(img), taps, reach));
        }
        case BlurKind::kMotion: {
            const double length = params.get("length");
            if (length < 1) throw ParamError("motion length must be >= 1");
            const double angle =
                params.has("angle") ? params.get("angle") : rng.uniform(0.0, kPi);
            const int n = std::max(1, static_cast<int>(std::lround(length)));
            if (n == 1) return img;
            const double cx = std::cos(angle), cy = std::sin(angle);
            const FloatImage in = to_float(img);
            FloatImage out = in;
            const float wt = 1.0f / static_cast<float>(n);
            for (int y = 0; y < img.height; ++y) {
                for (int x = 0; x < img.width; ++x) {
                    float acc[3] = {0.0f, 0.0f, 0.0f};
                    for (int i = 0; i < n; ++i) {
                        const double t = i - (n - 1) / 2.0;
                        bilinear_accumulate(in, x + t * cx, y + t * cy, wt, acc);
                    }
                    for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = acc[c];
                }
            }
            return to_bytes(out);
        }
        case BlurKind::kZoom: {
            const double max_zoom = params.get("max_zoom");
            if (max_zoom < 1) throw ParamError("zoom blur max_zoom must be >= 1");
            const int steps = std::max(1, static_cast<int>(std::llround((max_zoom - 1.0) / 0.01)));
            if (steps == 1) return img;
            const FloatImage in = to_float(img);
            FloatImage acc = in;  // zoom factor 1.0 contributes the original
            const double ccx = (img.width - 1) / 2.0;
            const double ccy = (img.height - 1) / 2.0;
            for (int s = 1; s < steps; ++s) {
                const double z = 1.0 + 0.01 * s;
                for (int y = 0; y < img.height; ++y) {
                    const double sy = ccy + (y - ccy) / z;
                    for (int x = 0; x < img.width; ++x) {
                        const double sx = ccx + (x - ccx) / z;
                        float val[3] = {0.0f, 0.0f, 0.0f};
                        bilinear_accumulate(in, sx, sy, 1.0f, val);
                        for (int c = 0; c < img.channels; ++c) acc.at(x, y, c) += val[c];
                    }
                }
            }
            const float inv = 1.0f / static_cast<float>(steps);
            for (auto& v : acc.data) v *= inv;
            return to_bytes(acc);
        }
    }
    throw ParamError("unknown blur kind");
}

ImageBuffer adjust_color(const ImageBuffer& img, ColorKind kind, const KernelParams& params) {
    validate(img);
    switch (kind) {
        case ColorKind::kBrightnessUp:
        case ColorKind::kBrightnessDown: {
            const double intensity = params.get("intensity");
            if (kind == ColorKind::kBrightnessUp && intensity < 1.0) {
                throw ParamError("brightness_up intensity must be >= 1");
            }
            if (kind == ColorKind::kBrightnessDown && (!(intensity > 0.0) || intensity > 1.0)) {
                throw ParamError("brightness_down intensity must be in (0,1]");
            }
            FloatImage f = to_float(img);
            const auto i = static_cast<float>(intensity);
            for (auto& v : f.data) v = clampf(v * i, 0.0f, 1.0f);
            return to_bytes(f);
        }
        case ColorKind::kContrastUp:
        case ColorKind::kContrastDown: {
            const double factor = params.get("factor");
            if (kind == ColorKind::kContrastUp && factor < 1.0) {
                throw ParamError("contrast_up factor must be >= 1");
            }
            if (kind == ColorKind::kContrastDown && (factor < 0.0 || factor > 1.0)) {
                throw ParamError("contrast_down factor must be in [0,1]");
            }
            FloatImage f = to_float(img);
            double sum = 0.0;
            for (float v : f.data) sum += v;
            const auto mean = static_cast<float>(sum / static_cast<double>(f.data.size()));
            const auto c = static_cast<float>(factor);
            for (auto& v : f.data) v = clampf((v - mean) * c + mean, 0.0f, 1.0f);
            return to_bytes(f);
        }
        case ColorKind::kSaturate: {
            require_rgb(img, "saturate");
            const double factor = params.get("factor");
            if (factor < 0) throw ParamError("saturate factor must be >= 0");
            FloatImage f = to_float(img);
            const auto sf = static_cast<float>(factor);
            for (std::size_t p = 0; p < f.pixel_count(); ++p) {
                float* px = f.data.data() + p * 3;
                float h, s, v;
                rgb_to_hsv(px[0], px[1], px[2], h, s, v);
                s = clampf(s * sf, 0.0f, 1.0f);
                hsv_to_rgb(h, s, v, px[0], px[1], px[2]);
            }
            return to_bytes(f);
        }
        case ColorKind::kGammaUp:
        case ColorKind::kGammaDown: {
            const double gamma = params.get("gamma");
            if (kind == ColorKind::kGammaUp && (!(gamma > 0.0) || gamma > 1.0)) {
                throw ParamError("gamma_up gamma must be in (0,1]");
            }
            if (kind == ColorKind::kGammaDown && gamma < 1.0) {
                throw ParamError("gamma_down gamma must be >= 1");
            }
            if (gamma == 1.0) return img;
            FloatImage f = to_float(img);
            const auto g = static_cast<float>(gamma);
            for (auto& v : f.data) v = std::pow(v, g);
            return to_bytes(f);
        }
    }
    throw ParamError("unknown color kind");
}

ImageBuffer overlay_stain(const ImageBuffer& img, int count, double radius_min, double radius_max,
                          RngStream& rng) {
    validate(img);
    require_rgb(img, "stain deposit");
    if (count < 0) throw ParamError("stain count must be >= 0");
    if (!(radius_min > 0) || radius_max < radius_min) {
        throw ParamError("stain radius range invalid");
    }
    if (count == 0) return img;

    FloatImage f = to_float(img);
    std::vector<bool> touched(img.pixel_count(), false);
    const float g1 = std::exp(-1.0f / (2.0f * kStainFalloffSigma * kStainFalloffSigma));

    for (int k = 0; k < count; ++k) {
        const double cx = rng.uniform(0.0, img.width);
        const double cy = rng.uniform(0.0, img.height);
        const double a = rng.uniform(radius_min, radius_max);
        const double b = rng.uniform(radius_min, radius_max);
        const double phi = rng.uniform(0.0, kPi);
        const double cphi = std::cos(phi), sphi = std::sin(phi);
        const double reach = std::max(a, b);

        const int x0 = std::max(0, static_cast<int>(std::floor(cx - reach)));
        const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cx + reach)));
        const int y0 = std::max(0, static_cast<int>(std::floor(cy - reach)));
        const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(cy + reach)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double dx = x - cx, dy = y - cy;
                const double u = (dx * cphi + dy * sphi) / a;
                const double v = (-dx * sphi + dy * cphi) / b;
                const double d = std::sqrt(u * u + v * v);
                if (d >= 1.0) continue;
                const float g = (std::exp(static_cast<float>(-d * d) /
                                          (2.0f * kStainFalloffSigma * kStainFalloffSigma)) -
                                 g1) /
                                (1.0f - g1);
                const float alpha = kStainAlpha * g;
                float* px = f.data.data() + (static_cast<std::size_t>(y) * img.width + x) * 3;
                for (int c = 0; c < 3; ++c) {
                    px[c] = (1.0f - alpha) * px[c] + alpha * kStainColor[c];
                }
                touched[static_cast<std::size_t>(y) * img.width + x] = true;
            }
        }
    }

    // Untouched pixels keep their original bytes bit-exactly.
    ImageBuffer out = img;
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        if (!touched[p]) continue;
        for (int c = 0; c < 3; ++c) out.data[p * 3 + c] = quantize(f.data[p * 3 + c]);
    }
    return out;
}

ImageBuffer overlay_bubble(const ImageBuffer& img, int count, double radius_min, double radius_max,
                           RngStream& rng) {
    validate(img);
    require_rgb(img, "bubble");
    if (count < 0) throw ParamError("bubble count must be >= 0");
    if (!(radius_min > 0) || radius_max < radius_min) {
        throw ParamError("bubble radius range invalid");
    }
    if (count == 0) return img;

    FloatImage f = to_float(img);
    std::vector<bool> touched(img.pixel_count(), false);

    for (int k = 0; k < count; ++k) {
        const double cx = rng.uniform(0.0, img.width);
        const double cy = rng.uniform(0.0, img.height);
        const double r = rng.uniform(radius_min, radius_max);

        const int x0 = std::max(0, static_cast<int>(std::floor(cx - r)));
        const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cx + r)));
        const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
        const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(cy + r)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double dx = x - cx, dy = y - cy;
                const double d = std::sqrt(dx * dx + dy * dy) / r;
                if (d >= 1.0) continue;
                const float alpha =
                    kBubbleAlpha * clampf(static_cast<float>((1.0 - d) / kBubbleEdgeWidth), 0.0f, 1.0f);
                const float gain = d < kBubbleRimStart ? kBubbleInteriorGain : kBubbleRimGain;
                float* px = f.data.data() + (static_cast<std::size_t>(y) * img.width + x) * 3;
                for (int c = 0; c < 3; ++c) {
                    px[c] = clampf((1.0f - alpha) * px[c] + alpha * px[c] * gain, 0.0f, 1.0f);
                }
                touched[static_cast<std::size_t>(y) * img.width + x] = true;
            }
        }
    }

    ImageBuffer out = img;
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        if (!touched[p]) continue;
        for (int c = 0; c < 3; ++c) out.data[p * 3 + c] = quantize(f.data[p * 3 + c]);
    }
    return out;
}

ImageBuffer black_corner(const ImageBuffer& img, double radius_fraction) {
    validate(img);
    if (!(radius_fraction > 0) || radius_fraction > 1.0) {
        throw ParamError("black corner radius fraction must be in (0,1]");
    }
    const double cx = (img.width - 1) / 2.0;
    const double cy = (img.height - 1) / 2.0;
    const double diag =
        std::sqrt(static_cast<double>(img.width) * img.width +
                  static_cast<double>(img.height) * img.height);
    const double r = radius_fraction * diag / 2.0;
    const double band = 6.0;  // falloff width in pixels

    ImageBuffer out = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double d = std::hypot(x - cx, y - cy);
            if (d <= r) continue;  // inside stays bit-exact
            float m = 0.0f;
            if (d < r + band) {
                m = 0.5f * (1.0f + static_cast<float>(std::cos(kPi * (d - r) / band)));
            }
            for (int c = 0; c < img.channels; ++c) {
                auto& b = out.data[(static_cast<std::size_t>(y) * img.width + x) * img.channels + c];
                b = quantize(static_cast<float>(b) / 255.0f * m);
            }
        }
    }
    return out;
}

ImageBuffer overlay_characters(const ImageBuffer& img, int count, int glyph_size, RngStream& rng) {
    validate(img);
    if (count < 0) throw ParamError("character count must be >= 0");
    if (glyph_size < 7) throw ParamError("glyph size must be >= 7 pixels");
    if (count == 0) return img;

    int gh = std::min(glyph_size, img.height);
    int gw = std::max(1, (gh * 5 + 3) / 7);
    if (gw > img.width) {
        gw = img.width;
        gh = std::max(1, (gw * 7 + 2) / 5);
    }

    ImageBuffer out = img;
    for (int k = 0; k < count; ++k) {
        const auto glyph = static_cast<int>(rng.uniform_int(0, 35));
        const auto gx = static_cast<int>(rng.uniform_int(0, img.width - gw));
        const auto gy = static_cast<int>(rng.uniform_int(0, img.height - gh));
        const std::uint8_t color = rng.uniform() < 0.5 ? 255 : 0;
        for (int py = 0; py < gh; ++py) {
            const int row = py * 7 / gh;
            for (int px = 0; px < gw; ++px) {
                const int col = px * 5 / gw;
                if ((kFont5x7[glyph][row] >> (4 - col)) & 1) {
                    for (int c = 0; c < img.channels; ++c) {
                        out.at(gx + px, gy + py, c) = color;
                    }
                }
            }
        }
    }
    return out;
}

ImageBuffer apply_params(const ImageBuffer& img, std::string_view corruption_id,
                         const KernelParams& params, RngStream& rng) {
    if (corruption_id == "jpeg") return jpeg_compress(img, params.get_int("quality"));
    if (corruption_id == "pixelate") return pixelate(img, params.get("factor"));
    if (corruption_id == "gaussian_noise") return add_noise(img, NoiseKind::kGaussian, params, rng);
    if (corruption_id == "speckle_noise") return add_noise(img, NoiseKind::kSpeckle, params, rng);
    if (corruption_id == "impulse_noise") return add_noise(img, NoiseKind::kImpulse, params, rng);
    if (corruption_id == "shot_noise") return add_noise(img, NoiseKind::kShot, params, rng);
    if (corruption_id == "gaussian_blur") return blur(img, BlurKind::kGaussian, params, rng);
    if (corruption_id == "defocus_blur") return blur(img, BlurKind::kDefocus, params, rng);
    if (corruption_id == "motion_blur") return blur(img, BlurKind::kMotion, params, rng);
    if (corruption_id == "zoom_blur") return blur(img, BlurKind::kZoom, params, rng);
    if (corruption_id == "brightness_up") return adjust_color(img, ColorKind::kBrightnessUp, params);
    if (corruption_id == "brightness_down")
        return adjust_color(img, ColorKind::kBrightnessDown, params);
    if (corruption_id == "contrast_up") return adjust_color(img, ColorKind::kContrastUp, params);
    if (corruption_id == "contrast_down") return adjust_color(img, ColorKind::kContrastDown, params);
    if (corruption_id == "saturate") return adjust_color(img, ColorKind::kSaturate, params);
    if (corruption_id == "gamma_up") return adjust_color(img, ColorKind::kGammaUp, params);
    if (corruption_id == "gamma_down") return adjust_color(img, ColorKind::kGammaDown, params);
    if (corruption_id == "stain_deposit") {
        return overlay_stain(img, params.get_int("count"), params.get("radius_min"),
                             params.get("radius_max"), rng);
    }
    if (corruption_id == "bubble") {
        return overlay_bubble(img, params.get_int("count"), params.get("radius_min"),
                              params.get("radius_max"), rng);
    }
    if (corruption_id == "black_corner") return black_corner(img, params.get("radius_fraction"));
    if (corruption_id == "characters") {
        return overlay_characters(img, params.get_int("count"), params.get_int("glyph_size"), rng);
    }
    throw UsageError("unknown corruption: " + std::string(corruption_id));
}

ImageBuffer apply(const ImageBuffer& img, const Registry& registry, std::string_view dataset_id,
                  std::string_view corruption_id, Severity severity, RngStream& rng) {
    const KernelParams& params = registry.params_for(dataset_id, corruption_id, severity);
    return apply_params(img, corruption_id, params, rng);
}

}  // namespace medc
