#include "medc/augment.hpp"

#include <algorithm>
#include <cmath>

#include "medc/errors.hpp"

namespace medc {

AugmentationPolicy::AugmentationPolicy(const Registry& registry, std::string_view dataset_id,
                                       std::uint64_t master_seed)
    : registry_(&registry), dataset_id_(dataset_id), master_seed_(master_seed) {
    extended_set_ = registry.corruption_set(dataset_id);
    extended_set_.emplace_back(kIdentityId);
}

RngStream AugmentationPolicy::stream_for(std::uint64_t image_index) const {
    return RngStream::derive(master_seed_, dataset_id_, "augment", 0, image_index);
}

SampledCorruption AugmentationPolicy::sample(RngStream& rng) const {
    const auto choice =
        rng.uniform_int(0, static_cast<std::int64_t>(extended_set_.size()) - 1);
    SampledCorruption out;
    out.corruption_id = extended_set_[static_cast<std::size_t>(choice)];
    if (out.is_identity()) return out;

    const auto [lo_params, hi_params] =
        registry_->param_endpoints(dataset_id_, out.corruption_id);
    const CorruptionMeta& meta = Registry::corruption_meta(out.corruption_id);
    for (const ParamSpec& ps : meta.params) {
        if (!lo_params->has(ps.name)) continue;  // optional parameter not configured
        const double e1 = lo_params->get(ps.name);
        const double e5 = hi_params->get(ps.name);
        const double lo = std::min(e1, e5);
        const double hi = std::max(e1, e5);
        double value;
        if (ps.integer) {
            value = static_cast<double>(rng.uniform_int(
                static_cast<std::int64_t>(std::llround(lo)),
                static_cast<std::int64_t>(std::llround(hi))));
        } else {
            value = rng.uniform(lo, hi);
        }
        out.params.set(ps.name, value);
    }
    return out;
}

ImageBuffer AugmentationPolicy::augment_image(const ImageBuffer& img,
                                              std::uint64_t image_index) const {
    RngStream rng = stream_for(image_index);
    const SampledCorruption pick = sample(rng);
    if (pick.is_identity()) return img;
    return apply_params(img, pick.corruption_id, pick.params, rng);
}

}  // namespace medc
