#pragma once

#include <string>
#include <string_view>

#include "medc/errors.hpp"

namespace medc {

/// Severity level of a corruption, 1 (mildest) to 5 (strongest).
class Severity {
public:
    static constexpr int kMin = 1;
    static constexpr int kMax = 5;
    static constexpr int kCount = 5;

    explicit Severity(int level) : level_(level) {
        if (level < kMin || level > kMax) {
            throw ParamError("severity level must be in [1,5], got " + std::to_string(level));
        }
    }

    int level() const { return level_; }
    /// Zero-based index into a 5-entry severity table.
    int index() const { return level_ - 1; }

    bool operator==(const Severity&) const = default;

private:
    int level_;
};

enum class CorruptionCategory {
    kDigital,
    kNoise,
    kBlur,
    kColor,
    kTaskSpecific,
};

enum class Task {
    kBinary,
    kMulticlass,
    kMultilabel,
    kOrdinalAsMulticlass,
};

std::string to_string(CorruptionCategory category);
CorruptionCategory category_from_string(std::string_view name);

std::string to_string(Task task);
Task task_from_string(std::string_view name);

/// True for tasks decided by argmax over class scores (everything except
/// multilabel, which thresholds each label independently).
inline bool is_single_label(Task task) { return task != Task::kMultilabel; }

}  // namespace medc
