#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "medc/kernels.hpp"
#include "medc/types.hpp"

namespace medc {

/// Bounds for one scalar hyperparameter of a corruption kernel.
struct ParamSpec {
    std::string name;
    double min_value = 0.0;
    double max_value = 0.0;
    bool integer = false;
    bool optional = false;
};

/// Static description of a corruption kernel: category, applicability, and the
/// scalar that encodes severity ("driver").
struct CorruptionMeta {
    std::string id;
    CorruptionCategory category = CorruptionCategory::kDigital;
    bool rgb_only = false;
    bool stochastic = false;
    std::string driver;        // parameter that must change monotonically with severity
    bool driver_increasing = true;
    std::vector<ParamSpec> params;
};

/// One corruption as configured for a dataset: kernel id plus the full
/// severity-1..5 hyperparameter table.
struct CorruptionSpec {
    std::string id;
    std::array<KernelParams, Severity::kCount> severities;

    bool operator==(const CorruptionSpec& other) const;
};

/// Everything the pipeline needs to know about one dataset.
struct DatasetProfile {
    std::string id;
    std::string modality;
    Task task = Task::kMulticlass;
    int channels = 1;
    int num_classes = 2;
    std::vector<CorruptionSpec> corruptions;

    bool operator==(const DatasetProfile& other) const;
    bool has_corruption(std::string_view corruption_id) const;
    const CorruptionSpec& corruption(std::string_view corruption_id) const;
};

/// The dataset -> corruption-set mapping with per-severity hyperparameters.
///
/// `builtin()` returns the registry shipped with the tool; `load()` reads a
/// JSON replacement. Both run the same structural validation.
class Registry {
public:
    static const Registry& builtin();
    static Registry from_json(const std::string& json_text);
    static Registry load(const std::string& path);

    /// Metadata for every known corruption id, in canonical order.
    static const std::vector<CorruptionMeta>& corruption_metas();
    static const CorruptionMeta& corruption_meta(std::string_view corruption_id);
    static bool is_known_corruption(std::string_view corruption_id);

    const std::string& version() const { return version_; }
    const std::vector<std::string>& dataset_ids() const { return dataset_ids_; }
    bool has_dataset(std::string_view dataset_id) const;
    const DatasetProfile& profile(std::string_view dataset_id) const;

    /// Corruption ids for a dataset, in registry order.
    std::vector<std::string> corruption_set(std::string_view dataset_id) const;

    const KernelParams& params_for(std::string_view dataset_id, std::string_view corruption_id,
                                   Severity severity) const;

    /// Severity-1 and severity-5 parameter tables, used by the augmentation
    /// sampler as interval endpoints.
    std::pair<const KernelParams*, const KernelParams*> param_endpoints(
        std::string_view dataset_id, std::string_view corruption_id) const;

    /// Throws ParamError on any structural violation.
    void validate() const;

    std::string to_json(int indent = 2) const;

    bool operator==(const Registry& other) const;

private:
    std::string version_;
    std::vector<std::string> dataset_ids_;
    std::map<std::string, DatasetProfile> profiles_;
};

}  // namespace medc
