#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "medc/image.hpp"
#include "medc/kernels.hpp"
#include "medc/registry.hpp"
#include "medc/rng.hpp"

namespace medc {

/// Pseudo-corruption id meaning "leave the image untouched".
inline constexpr std::string_view kIdentityId = "identity";

/// One draw from the augmentation distribution: which corruption to apply and
/// with which hyperparameters. `params` is empty for identity.
struct SampledCorruption {
    std::string corruption_id;
    KernelParams params;

    bool is_identity() const { return corruption_id == kIdentityId; }
};

/// Training-time corruption sampler for one dataset.
///
/// Each image index gets its own derived random stream, so augmentation of one
/// image never depends on how many images were processed before it. A draw
/// picks uniformly from the dataset's corruption set plus identity, then draws
/// every hyperparameter uniformly between its severity-1 and severity-5
/// endpoint values (integer parameters over the inclusive integer range).
class AugmentationPolicy {
public:
    AugmentationPolicy(const Registry& registry, std::string_view dataset_id,
                       std::uint64_t master_seed);

    const std::string& dataset_id() const { return dataset_id_; }
    std::uint64_t master_seed() const { return master_seed_; }

    /// Corruption ids plus "identity", in draw order. The index draw is
    /// uniform over this list.
    const std::vector<std::string>& extended_set() const { return extended_set_; }

    /// Random stream governing the augmentation of one image.
    RngStream stream_for(std::uint64_t image_index) const;

    /// Draws a corruption choice and its hyperparameters from `rng`.
    SampledCorruption sample(RngStream& rng) const;

    /// Samples and applies in one step, using the per-image stream for both
    /// the choice and any kernel-internal randomness.
    ImageBuffer augment_image(const ImageBuffer& img, std::uint64_t image_index) const;

private:
    const Registry* registry_;
    std::string dataset_id_;
    std::uint64_t master_seed_;
    std::vector<std::string> extended_set_;
};

}  // namespace medc
