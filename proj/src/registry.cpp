#include "medc/registry.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "medc/errors.hpp"

namespace medc {

namespace {

using SevRow = std::array<double, Severity::kCount>;

const std::vector<std::string> kKnownDatasets = {
    "pathmnist",  "chestmnist",  "dermamnist",  "octmnist",
    "pneumoniamnist", "retinamnist", "breastmnist", "bloodmnist",
    "tissuemnist", "organamnist", "organcmnist", "organsmnist",
};

std::vector<CorruptionMeta> build_metas() {
    using C = CorruptionCategory;
    std::vector<CorruptionMeta> m;
    auto add = [&m](std::string id, C cat, bool rgb_only, bool stochastic, std::string driver,
                    bool increasing, std::vector<ParamSpec> params) {
        m.push_back({std::move(id), cat, rgb_only, stochastic, std::move(driver), increasing,
                     std::move(params)});
    };
    add("jpeg", C::kDigital, false, false, "quality", false,
        {{"quality", 1, 100, true, false}});
    add("pixelate", C::kDigital, false, false, "factor", false,
        {{"factor", 0.001, 1.0, false, false}});
    add("gaussian_noise", C::kNoise, false, true, "sigma", true,
        {{"sigma", 0.0, 2.0, false, false}});
    add("speckle_noise", C::kNoise, false, true, "sigma", true,
        {{"sigma", 0.0, 2.0, false, false}});
    add("impulse_noise", C::kNoise, false, true, "amount", true,
        {{"amount", 0.0, 1.0, false, false}});
    add("shot_noise", C::kNoise, false, true, "lam", false,
        {{"lam", 0.5, 1000.0, false, false}});
    add("gaussian_blur", C::kBlur, false, false, "sigma", true,
        {{"sigma", 0.0, 32.0, false, false}});
    add("defocus_blur", C::kBlur, false, false, "radius", true,
        {{"radius", 0.0, 32.0, false, false}});
    add("motion_blur", C::kBlur, false, true, "length", true,
        {{"length", 1.0, 64.0, false, false}, {"angle", 0.0, 6.2832, false, true}});
    add("zoom_blur", C::kBlur, false, false, "max_zoom", true,
        {{"max_zoom", 1.0, 2.0, false, false}});
    add("brightness_up", C::kColor, false, false, "intensity", true,
        {{"intensity", 1.0, 4.0, false, false}});
    add("brightness_down", C::kColor, false, false, "intensity", false,
        {{"intensity", 0.05, 1.0, false, false}});
    add("contrast_up", C::kColor, false, false, "factor", true,
        {{"factor", 1.0, 8.0, false, false}});
    add("contrast_down", C::kColor, false, false, "factor", false,
        {{"factor", 0.0, 1.0, false, false}});
    add("saturate", C::kColor, true, false, "factor", true,
        {{"factor", 0.0, 16.0, false, false}});
    add("gamma_up", C::kColor, false, false, "gamma", false,
        {{"gamma", 0.05, 1.0, false, false}});
    add("gamma_down", C::kColor, false, false, "gamma", true,
        {{"gamma", 1.0, 8.0, false, false}});
    add("stain_deposit", C::kTaskSpecific, true, true, "count", true,
        {{"count", 0, 64, true, false},
         {"radius_min", 1.0, 64.0, false, false},
         {"radius_max", 1.0, 96.0, false, false}});
    add("bubble", C::kTaskSpecific, true, true, "count", true,
        {{"count", 0, 64, true, false},
         {"radius_min", 1.0, 64.0, false, false},
         {"radius_max", 1.0, 96.0, false, false}});
    add("black_corner", C::kTaskSpecific, false, false, "radius_fraction", false,
        {{"radius_fraction", 0.05, 1.0, false, false}});
    add("characters", C::kTaskSpecific, false, true, "count", true,
        {{"count", 0, 64, true, false}, {"glyph_size", 7, 64, true, false}});
    return m;
}

CorruptionSpec make_spec(const std::string& id,
                         std::initializer_list<std::pair<const char*, SevRow>> rows) {
    CorruptionSpec spec;
    spec.id = id;
    for (const auto& [name, values] : rows) {
        for (std::size_t s = 0; s < Severity::kCount; ++s) {
            spec.severities[s].set(name, values[s]);
        }
    }
    return spec;
}

// Shared severity tables. Each corruption uses the same hyperparameter ladder
// in every dataset that includes it.
CorruptionSpec builtin_spec(const std::string& id) {
    if (id == "jpeg") return make_spec(id, {{"quality", {25, 18, 15, 10, 7}}});
    if (id == "pixelate") return make_spec(id, {{"factor", {0.6, 0.5, 0.4, 0.3, 0.25}}});
    if (id == "gaussian_noise")
        return make_spec(id, {{"sigma", {0.08, 0.12, 0.18, 0.26, 0.38}}});
    if (id == "speckle_noise")
        return make_spec(id, {{"sigma", {0.15, 0.20, 0.35, 0.45, 0.60}}});
    if (id == "impulse_noise")
        return make_spec(id, {{"amount", {0.03, 0.06, 0.09, 0.17, 0.27}}});
    if (id == "shot_noise") return make_spec(id, {{"lam", {60, 25, 12, 5, 3}}});
    if (id == "gaussian_blur") return make_spec(id, {{"sigma", {1, 2, 3, 4, 6}}});
    if (id == "defocus_blur") return make_spec(id, {{"radius", {3, 4, 6, 8, 10}}});
    if (id == "motion_blur") return make_spec(id, {{"length", {9, 13, 17, 21, 25}}});
    if (id == "zoom_blur")
        return make_spec(id, {{"max_zoom", {1.11, 1.16, 1.21, 1.26, 1.31}}});
    if (id == "brightness_up")
        return make_spec(id, {{"intensity", {1.1, 1.3, 1.5, 1.7, 1.9}}});
    if (id == "brightness_down")
        return make_spec(id, {{"intensity", {0.9, 0.8, 0.7, 0.6, 0.5}}});
    if (id == "contrast_up") return make_spec(id, {{"factor", {1.3, 1.6, 1.9, 2.2, 2.5}}});
    if (id == "contrast_down")
        return make_spec(id, {{"factor", {0.4, 0.3, 0.2, 0.1, 0.05}}});
    if (id == "saturate") return make_spec(id, {{"factor", {1.6, 2.2, 2.8, 3.4, 4.0}}});
    if (id == "gamma_up") return make_spec(id, {{"gamma", {0.8, 0.65, 0.5, 0.4, 0.3}}});
    if (id == "gamma_down") return make_spec(id, {{"gamma", {1.25, 1.5, 1.8, 2.2, 2.6}}});
    if (id == "stain_deposit")
        return make_spec(id, {{"count", {2, 4, 6, 9, 12}},
                              {"radius_min", {8, 10, 12, 14, 16}},
                              {"radius_max", {16, 20, 24, 28, 32}}});
    if (id == "bubble")
        return make_spec(id, {{"count", {2, 3, 5, 7, 9}},
                              {"radius_min", {6, 8, 10, 12, 14}},
                              {"radius_max", {14, 18, 22, 26, 30}}});
    if (id == "black_corner")
        return make_spec(id, {{"radius_fraction", {0.95, 0.85, 0.75, 0.65, 0.55}}});
    if (id == "characters")
        return make_spec(id, {{"count", {3, 5, 8, 11, 15}}, {"glyph_size", {16, 18, 20, 22, 24}}});
    throw ParamError("no builtin severity table for corruption: " + id);
}

DatasetProfile make_profile(std::string id, std::string modality, Task task, int channels,
                            int num_classes, const std::vector<std::string>& corruption_ids) {
    DatasetProfile p;
    p.id = std::move(id);
    p.modality = std::move(modality);
    p.task = task;
    p.channels = channels;
    p.num_classes = num_classes;
    for (const auto& cid : corruption_ids) {
        p.corruptions.push_back(builtin_spec(cid));
    }
    return p;
}

const std::vector<std::string> kXraySet = {
    "jpeg",          "pixelate",      "gaussian_noise", "speckle_noise", "impulse_noise",
    "shot_noise",    "gaussian_blur", "brightness_up",  "brightness_down", "contrast_up",
    "contrast_down", "gamma_up",      "gamma_down"};

const std::vector<std::string> kMicroscopySet = {
    "jpeg",          "pixelate",    "defocus_blur",    "motion_blur", "brightness_up",
    "brightness_down", "contrast_up", "contrast_down", "saturate",    "stain_deposit",
    "bubble"};

}  // namespace

bool CorruptionSpec::operator==(const CorruptionSpec& other) const {
    return id == other.id && severities == other.severities;
}

bool DatasetProfile::operator==(const DatasetProfile& other) const {
    return id == other.id && modality == other.modality && task == other.task &&
           channels == other.channels && num_classes == other.num_classes &&
           corruptions == other.corruptions;
}

bool DatasetProfile::has_corruption(std::string_view corruption_id) const {
    return std::any_of(corruptions.begin(), corruptions.end(),
                       [&](const CorruptionSpec& c) { return c.id == corruption_id; });
}

const CorruptionSpec& DatasetProfile::corruption(std::string_view corruption_id) const {
    for (const auto& c : corruptions) {
        if (c.id == corruption_id) return c;
    }
    std::string valid;
    for (const auto& c : corruptions) {
        if (!valid.empty()) valid += ", ";
        valid += c.id;
    }
    throw ApplicabilityError("corruption '" + std::string(corruption_id) +
                             "' is not applicable to dataset '" + id + "' (valid: " + valid + ")");
}

const std::vector<CorruptionMeta>& Registry::corruption_metas() {
    static const std::vector<CorruptionMeta> metas = build_metas();
    return metas;
}

const CorruptionMeta& Registry::corruption_meta(std::string_view corruption_id) {
    for (const auto& m : corruption_metas()) {
        if (m.id == corruption_id) return m;
    }
    throw UsageError("unknown corruption: " + std::string(corruption_id));
}

bool Registry::is_known_corruption(std::string_view corruption_id) {
    for (const auto& m : corruption_metas()) {
        if (m.id == corruption_id) return true;
    }
    return false;
}

const Registry& Registry::builtin() {
    static const Registry reg = [] {
        Registry r;
        r.version_ = "builtin-1";
        std::vector<DatasetProfile> profiles;
        profiles.push_back(make_profile("pathmnist", "colon pathology", Task::kMulticlass, 3, 9,
                                        kMicroscopySet));
        profiles.push_back(
            make_profile("chestmnist", "chest x-ray", Task::kMultilabel, 1, 14, kXraySet));
        profiles.push_back(make_profile(
            "dermamnist", "dermatoscope", Task::kMulticlass, 3, 7,
            {"jpeg", "pixelate", "gaussian_noise", "speckle_noise", "impulse_noise", "shot_noise",
             "defocus_blur", "motion_blur", "zoom_blur", "brightness_up", "contrast_down",
             "black_corner", "characters"}));
        profiles.push_back(make_profile(
            "octmnist", "retinal oct", Task::kMulticlass, 1, 4,
            {"jpeg", "pixelate", "speckle_noise", "defocus_blur", "motion_blur", "contrast_down"}));
        profiles.push_back(
            make_profile("pneumoniamnist", "chest x-ray", Task::kBinary, 1, 2, kXraySet));
        profiles.push_back(make_profile(
            "retinamnist", "fundus camera", Task::kOrdinalAsMulticlass, 3, 5,
            {"jpeg", "pixelate", "gaussian_noise", "speckle_noise", "defocus_blur", "motion_blur",
             "brightness_down", "contrast_down"}));
        profiles.push_back(make_profile(
            "breastmnist", "breast ultrasound", Task::kBinary, 1, 2,
            {"jpeg", "pixelate", "speckle_noise", "motion_blur", "brightness_up",
             "brightness_down", "contrast_down"}));
        profiles.push_back(make_profile("bloodmnist", "blood cell microscope", Task::kMulticlass,
                                        3, 8, kMicroscopySet));
        profiles.push_back(make_profile(
            "tissuemnist", "kidney cortex microscope", Task::kMulticlass, 1, 8,
            {"jpeg", "pixelate", "impulse_noise", "gaussian_blur", "brightness_up",
             "brightness_down", "contrast_up", "contrast_down"}));
        profiles.push_back(
            make_profile("organamnist", "abdominal ct", Task::kMulticlass, 1, 11, kXraySet));
        profiles.push_back(
            make_profile("organcmnist", "abdominal ct", Task::kMulticlass, 1, 11, kXraySet));
        profiles.push_back(
            make_profile("organsmnist", "abdominal ct", Task::kMulticlass, 1, 11, kXraySet));
        for (auto& p : profiles) {
            r.dataset_ids_.push_back(p.id);
            r.profiles_[p.id] = std::move(p);
        }
        r.validate();
        return r;
    }();
    return reg;
}

bool Registry::has_dataset(std::string_view dataset_id) const {
    return profiles_.count(std::string(dataset_id)) != 0;
}

const DatasetProfile& Registry::profile(std::string_view dataset_id) const {
    auto it = profiles_.find(std::string(dataset_id));
    if (it == profiles_.end()) {
        std::string valid;
        for (const auto& id : dataset_ids_) {
            if (!valid.empty()) valid += ", ";
            valid += id;
        }
        throw UsageError("unknown dataset '" + std::string(dataset_id) + "' (valid: " + valid +
                         ")");
    }
    return it->second;
}

std::vector<std::string> Registry::corruption_set(std::string_view dataset_id) const {
    const DatasetProfile& p = profile(dataset_id);
    std::vector<std::string> ids;
    ids.reserve(p.corruptions.size());
    for (const auto& c : p.corruptions) ids.push_back(c.id);
    return ids;
}

const KernelParams& Registry::params_for(std::string_view dataset_id,
                                         std::string_view corruption_id, Severity severity) const {
    return profile(dataset_id).corruption(corruption_id).severities[severity.index()];
}

std::pair<const KernelParams*, const KernelParams*> Registry::param_endpoints(
    std::string_view dataset_id, std::string_view corruption_id) const {
    const CorruptionSpec& spec = profile(dataset_id).corruption(corruption_id);
    return {&spec.severities.front(), &spec.severities.back()};
}

void Registry::validate() const {
    if (version_.empty()) throw ParamError("registry version must be non-empty");
    if (profiles_.empty()) throw ParamError("registry must define at least one dataset");
    for (const auto& id : dataset_ids_) {
        if (std::find(kKnownDatasets.begin(), kKnownDatasets.end(), id) == kKnownDatasets.end()) {
            throw ParamError("registry dataset id '" + id + "' is not a recognized dataset");
        }
        if (!profiles_.count(id)) throw ParamError("registry dataset list/profile mismatch");
    }
    if (dataset_ids_.size() != profiles_.size()) {
        throw ParamError("registry dataset list/profile mismatch");
    }

    for (const auto& [id, p] : profiles_) {
        const std::string where = "dataset '" + id + "': ";
        if (p.id != id) throw ParamError(where + "profile id mismatch");
        if (p.channels != 1 && p.channels != 3) {
            throw ParamError(where + "channels must be 1 or 3");
        }
        if (p.num_classes < 2) throw ParamError(where + "num_classes must be >= 2");
        if (p.task == Task::kBinary && p.num_classes != 2) {
            throw ParamError(where + "binary task requires num_classes == 2");
        }
        if (!p.has_corruption("jpeg") || !p.has_corruption("pixelate")) {
            throw ParamError(where + "every dataset must include jpeg and pixelate");
        }

        std::vector<std::string> seen;
        for (const auto& spec : p.corruptions) {
            const std::string cwhere = where + "corruption '" + spec.id + "': ";
            if (std::find(seen.begin(), seen.end(), spec.id) != seen.end()) {
                throw ParamError(cwhere + "listed twice");
            }
            seen.push_back(spec.id);
            if (!is_known_corruption(spec.id)) {
                throw ParamError(cwhere + "unknown corruption id");
            }
            const CorruptionMeta& meta = corruption_meta(spec.id);
            if (meta.rgb_only && p.channels != 3) {
                throw ParamError(cwhere + "requires 3 channels but dataset is grayscale");
            }

            for (std::size_t s = 0; s < Severity::kCount; ++s) {
                const KernelParams& kp = spec.severities[s];
                const std::string swhere = cwhere + "severity " + std::to_string(s + 1) + ": ";
                for (const auto& ps : meta.params) {
                    if (!kp.has(ps.name)) {
                        if (ps.optional) continue;
                        throw ParamError(swhere + "missing parameter '" + ps.name + "'");
                    }
                    const double v = kp.get(ps.name);
                    if (v < ps.min_value || v > ps.max_value) {
                        throw ParamError(swhere + "parameter '" + ps.name + "' = " +
                                         std::to_string(v) + " outside [" +
                                         std::to_string(ps.min_value) + ", " +
                                         std::to_string(ps.max_value) + "]");
                    }
                    if (ps.integer) kp.get_int(ps.name);  // throws if fractional
                }
                for (const auto& [name, value] : kp.values()) {
                    (void)value;
                    const bool known = std::any_of(
                        meta.params.begin(), meta.params.end(),
                        [&](const ParamSpec& ps) { return ps.name == name; });
                    if (!known) {
                        throw ParamError(swhere + "unexpected parameter '" + name + "'");
                    }
                }
                if (kp.has("radius_min") && kp.has("radius_max") &&
                    kp.get("radius_min") > kp.get("radius_max")) {
                    throw ParamError(swhere + "radius_min exceeds radius_max");
                }
            }

            // Severity must strictly sharpen: the driver parameter moves
            // monotonically in its declared direction from 1 to 5.
            for (std::size_t s = 1; s < Severity::kCount; ++s) {
                const double prev = spec.severities[s - 1].get(meta.driver);
                const double cur = spec.severities[s].get(meta.driver);
                const bool ok = meta.driver_increasing ? cur > prev : cur < prev;
                if (!ok) {
                    throw ParamError(cwhere + "driver '" + meta.driver +
                                     "' is not strictly monotone across severities");
                }
            }
        }
    }
}

std::string Registry::to_json(int indent) const {
    nlohmann::json root;
    root["version"] = version_;
    nlohmann::json datasets = nlohmann::json::array();
    for (const auto& id : dataset_ids_) {
        const DatasetProfile& p = profiles_.at(id);
        nlohmann::json jp;
        jp["id"] = p.id;
        jp["modality"] = p.modality;
        jp["task"] = std::string(to_string(p.task));
        jp["channels"] = p.channels;
        jp["num_classes"] = p.num_classes;
        nlohmann::json jc = nlohmann::json::array();
        for (const auto& spec : p.corruptions) {
            nlohmann::json js;
            js["id"] = spec.id;
            nlohmann::json sevs = nlohmann::json::array();
            for (const auto& kp : spec.severities) {
                nlohmann::json jkp = nlohmann::json::object();
                for (const auto& [name, value] : kp.values()) jkp[name] = value;
                sevs.push_back(std::move(jkp));
            }
            js["severities"] = std::move(sevs);
            jc.push_back(std::move(js));
        }
        jp["corruptions"] = std::move(jc);
        datasets.push_back(std::move(jp));
    }
    root["datasets"] = std::move(datasets);
    return root.dump(indent);
}

Registry Registry::from_json(const std::string& json_text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("registry JSON malformed: ") + e.what());
    }

    Registry r;
    try {
        r.version_ = root.at("version").get<std::string>();
        for (const auto& jp : root.at("datasets")) {
            DatasetProfile p;
            p.id = jp.at("id").get<std::string>();
            p.modality = jp.value("modality", std::string());
            p.task = task_from_string(jp.at("task").get<std::string>());
            p.channels = jp.at("channels").get<int>();
            p.num_classes = jp.at("num_classes").get<int>();
            for (const auto& js : jp.at("corruptions")) {
                CorruptionSpec spec;
                spec.id = js.at("id").get<std::string>();
                const auto& sevs = js.at("severities");
                if (sevs.size() != Severity::kCount) {
                    throw DataError("registry corruption '" + spec.id + "' must define exactly " +
                                    std::to_string(Severity::kCount) + " severities");
                }
                for (std::size_t s = 0; s < Severity::kCount; ++s) {
                    for (const auto& [name, value] : sevs[s].items()) {
                        if (!value.is_number()) {
                            throw DataError("registry parameter '" + name + "' must be numeric");
                        }
                        spec.severities[s].set(name, value.get<double>());
                    }
                }
                p.corruptions.push_back(std::move(spec));
            }
            if (std::find(r.dataset_ids_.begin(), r.dataset_ids_.end(), p.id) !=
                r.dataset_ids_.end()) {
                throw DataError("registry dataset '" + p.id + "' defined twice");
            }
            r.dataset_ids_.push_back(p.id);
            r.profiles_[p.id] = std::move(p);
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("registry JSON missing or mistyped field: ") + e.what());
    }

    r.validate();
    return r;
}

Registry Registry::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open registry file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

bool Registry::operator==(const Registry& other) const {
    return version_ == other.version_ && dataset_ids_ == other.dataset_ids_ &&
           profiles_ == other.profiles_;
}

}  // namespace medc
