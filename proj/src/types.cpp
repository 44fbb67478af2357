#include "medc/types.hpp"

namespace medc {

std::string to_string(CorruptionCategory category) {
    switch (category) {
        case CorruptionCategory::kDigital: return "digital";
        case CorruptionCategory::kNoise: return "noise";
        case CorruptionCategory::kBlur: return "blur";
        case CorruptionCategory::kColor: return "color";
        case CorruptionCategory::kTaskSpecific: return "task_specific";
    }
    throw Error("unreachable corruption category");
}

CorruptionCategory category_from_string(std::string_view name) {
    if (name == "digital") return CorruptionCategory::kDigital;
    if (name == "noise") return CorruptionCategory::kNoise;
    if (name == "blur") return CorruptionCategory::kBlur;
    if (name == "color") return CorruptionCategory::kColor;
    if (name == "task_specific") return CorruptionCategory::kTaskSpecific;
    throw DataError("unknown corruption category: " + std::string(name));
}

std::string to_string(Task task) {
    switch (task) {
        case Task::kBinary: return "binary";
        case Task::kMulticlass: return "multiclass";
        case Task::kMultilabel: return "multilabel";
        case Task::kOrdinalAsMulticlass: return "ordinal-as-multiclass";
    }
    throw Error("unreachable task");
}

Task task_from_string(std::string_view name) {
    if (name == "binary") return Task::kBinary;
    if (name == "multiclass") return Task::kMulticlass;
    if (name == "multilabel") return Task::kMultilabel;
    if (name == "ordinal-as-multiclass") return Task::kOrdinalAsMulticlass;
    throw DataError("unknown task: " + std::string(name));
}

}  // namespace medc
