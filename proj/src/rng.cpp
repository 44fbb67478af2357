#include "medc/rng.hpp"

#include <cmath>

#include "medc/errors.hpp"

namespace medc {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_absorb_u64(std::uint64_t& h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffULL;
        h *= kFnvPrime;
    }
}

void fnv_absorb_str(std::uint64_t& h, std::string_view s) {
    fnv_absorb_u64(h, s.size());  // length prefix keeps field boundaries unambiguous
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
}

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

RngStream::RngStream(Derivation derivation) : derivation_(std::move(derivation)) {
    std::uint64_t h = kFnvOffset;
    fnv_absorb_u64(h, derivation_.master_seed);
    fnv_absorb_str(h, derivation_.dataset_id);
    fnv_absorb_str(h, derivation_.corruption_id);
    fnv_absorb_u64(h, static_cast<std::uint64_t>(derivation_.severity_code));
    fnv_absorb_u64(h, derivation_.image_index);
    for (auto& s : state_) {
        s = splitmix64(h);
    }
}

RngStream RngStream::derive(std::uint64_t master_seed, std::string_view dataset_id,
                            std::string_view corruption_id, int severity_code,
                            std::uint64_t image_index) {
    if (severity_code < 0 || severity_code > 5) {
        throw ParamError("severity code must be 0 (clean) or 1..5");
    }
    Derivation d;
    d.master_seed = master_seed;
    d.dataset_id = std::string(dataset_id);
    d.corruption_id = std::string(corruption_id);
    d.severity_code = severity_code;
    d.image_index = image_index;
    return RngStream(std::move(d));
}

// xoshiro256++
std::uint64_t RngStream::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::uint64_t RngStream::bounded(std::uint64_t n) {
    // Unbiased modulo via rejection.
    std::uint64_t x, r;
    do {
        x = next_u64();
        r = x % n;
    } while (x - r > std::uint64_t(-1) - (n - 1));
    return r;
}

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw ParamError("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next_u64());  // full 64-bit range
    return lo + static_cast<std::int64_t>(bounded(span));
}

double RngStream::normal() {
    if (have_spare_normal_) {
        have_spare_normal_ = false;
        return spare_normal_;
    }
    // Box-Muller; u1 nudged away from zero so log stays finite.
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_normal_ = mag * std::sin(kTwoPi * u2);
    have_spare_normal_ = true;
    return mag * std::cos(kTwoPi * u2);
}

double RngStream::normal(double mean, double stddev) {
    return mean + stddev * normal();
}

std::int64_t RngStream::poisson(double mean) {
    if (mean < 0.0 || !std::isfinite(mean)) throw ParamError("poisson: mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
        // Knuth's multiplicative inversion.
        const double limit = std::exp(-mean);
        double prod = 1.0;
        std::int64_t k = -1;
        do {
            ++k;
            prod *= uniform();
        } while (prod > limit);
        return k;
    }
    // Hoermann's PTRD transformed rejection.
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = uniform() - 0.5;
        const double v = uniform();
        const double us = 0.5 - std::abs(u);
        const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
        if (us >= 0.07 && v <= vr) return k;
        if (k < 0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
            k * loglam - mean - std::lgamma(static_cast<double>(k) + 1.0)) {
            return k;
        }
    }
}

}  // namespace medc
