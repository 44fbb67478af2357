#pragma once

#include <map>
#include <string>
#include <string_view>

#include "medc/image.hpp"
#include "medc/rng.hpp"
#include "medc/types.hpp"

namespace medc {

class Registry;

/// Named scalar hyperparameters for one kernel invocation, e.g.
/// {"sigma": 0.12} or {"count": 4, "radius_min": 10, "radius_max": 20}.
class KernelParams {
public:
    KernelParams() = default;
    KernelParams(std::initializer_list<std::pair<const std::string, double>> init)
        : values_(init) {}

    void set(const std::string& name, double value) { values_[name] = value; }

    bool has(std::string_view name) const { return values_.count(std::string(name)) > 0; }

    /// Throws ParamError when the scalar is absent.
    double get(std::string_view name) const;
    double get_or(std::string_view name, double fallback) const;

    /// Fetches a scalar declared integer-valued; throws if it is not integral.
    int get_int(std::string_view name) const;

    const std::map<std::string, double>& values() const { return values_; }

    bool operator==(const KernelParams&) const = default;

private:
    std::map<std::string, double> values_;
};

enum class NoiseKind { kGaussian, kSpeckle, kImpulse, kShot };
enum class BlurKind { kGaussian, kDefocus, kMotion, kZoom };
enum class ColorKind {
    kBrightnessUp,
    kBrightnessDown,
    kContrastUp,
    kContrastDown,
    kSaturate,
    kGammaUp,
    kGammaDown,
};

// --- Corruption kernels -----------------------------------------------------
// All kernels are pure: same (input, params, rng derivation) gives a
// bit-identical output. Every kernel preserves width/height/channels and
// returns samples clamped to [0,255].

/// In-memory JPEG encode/decode round trip at the given quality (1..100).
ImageBuffer jpeg_compress(const ImageBuffer& img, int quality);

/// Box-filter downscale by `factor` in (0,1], then nearest-neighbor upscale
/// back to the original size. factor == 1 is the identity.
ImageBuffer pixelate(const ImageBuffer& img, double factor);

/// Additive gaussian, multiplicative speckle, salt-and-pepper impulse
/// (whole pixels, equiprobable black/white) or Poisson shot noise.
/// Params: sigma (gaussian, speckle), amount (impulse), lam (shot).
ImageBuffer add_noise(const ImageBuffer& img, NoiseKind kind, const KernelParams& params,
                      RngStream& rng);

/// Gaussian (separable), defocus (disk kernel), motion (line kernel with the
/// angle drawn from rng when not given) and zoom (mean over progressively
/// center-zoomed copies) blur, all with reflect padding.
/// Params: sigma / radius / length [, angle] / max_zoom.
ImageBuffer blur(const ImageBuffer& img, BlurKind kind, const KernelParams& params,
                 RngStream& rng);

/// Deterministic photometric adjustments. Params: intensity (brightness),
/// factor (contrast, saturate), gamma. Saturate requires 3 channels.
ImageBuffer adjust_color(const ImageBuffer& img, ColorKind kind, const KernelParams& params);

/// `count` elliptical hematoxylin-colored deposits at rng positions with
/// gaussian-falloff alpha; no pixel outside the ellipses changes. RGB only.
/// Per blob the stream is consumed in the order cx, cy, axis_a, axis_b, angle.
ImageBuffer overlay_stain(const ImageBuffer& img, int count, double radius_min,
                          double radius_max, RngStream& rng);

/// `count` circular air bubbles: brightened interior, darkened rim, soft
/// edge; no pixel outside the circles changes. RGB only.
/// Per bubble the stream is consumed in the order cx, cy, radius.
ImageBuffer overlay_bubble(const ImageBuffer& img, int count, double radius_min,
                           double radius_max, RngStream& rng);

/// Blacks out everything outside the centered circle of radius
/// radius_fraction * (diagonal / 2), with a short cosine falloff band.
ImageBuffer black_corner(const ImageBuffer& img, double radius_fraction);

/// `count` glyphs from the embedded 5x7 font (digits and uppercase), solid
/// white or black, at rng positions. Per glyph the stream is consumed in the
/// order glyph index, x, y, color.
ImageBuffer overlay_characters(const ImageBuffer& img, int count, int glyph_size,
                               RngStream& rng);

// --- Dispatch ---------------------------------------------------------------

/// Runs the kernel named by `corruption_id` with explicit params. This is the
/// shared entry point for severity tables and for the augmentation sampler.
ImageBuffer apply_params(const ImageBuffer& img, std::string_view corruption_id,
                         const KernelParams& params, RngStream& rng);

/// Looks up the severity parameters for (corruption, severity) in the
/// registry profile of `dataset_id` and dispatches.
ImageBuffer apply(const ImageBuffer& img, const Registry& registry, std::string_view dataset_id,
                  std::string_view corruption_id, Severity severity, RngStream& rng);

}  // namespace medc
