#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "medc/registry.hpp"
#include "medc/types.hpp"

namespace medc {

/// One scored prediction. `truth` holds a single class index for single-label
/// tasks, or a 0/1 vector of length num_classes for multilabel. `scores`
/// always has num_classes entries.
struct PredictionRow {
    std::string image_id;
    std::string corruption;  // "clean" or a corruption id
    int severity = 0;        // 0 iff corruption == "clean", else 1..5
    std::vector<int> truth;
    std::vector<double> scores;
};

/// Label used for uncorrupted evaluation rows.
inline constexpr std::string_view kCleanLabel = "clean";

/// A parsed prediction file for one model on one dataset.
struct PredictionTable {
    Task task = Task::kMulticlass;
    int num_classes = 2;
    std::vector<PredictionRow> rows;

    /// Header: image_id,corruption,severity,true,score_0..score_{K-1}.
    /// Multilabel truth cells are '|'-separated 0/1 flags.
    static PredictionTable parse_csv(const std::string& text, Task task, int num_classes);
    static PredictionTable load(const std::string& path, Task task, int num_classes);
};

/// Balanced error plus any degeneracy warnings for one evaluation stratum.
struct BalancedError {
    double value = 0.0;
    std::vector<std::string> warnings;
};

/// Balanced error = 1 - mean per-class recall.
///
/// Single-label: predictions by argmax (ties resolved to the lowest class
/// index); classes with no examples in the stratum are excluded from the mean
/// and reported in `warnings`. Multilabel: per-label balanced error of the
/// thresholded score (mean of the two one-vs-rest recalls), averaged across
/// labels.
BalancedError balanced_error(const std::vector<const PredictionRow*>& rows, Task task,
                             int num_classes, double threshold = 0.5);

/// Per-(corruption, severity) balanced errors for one model, plus the clean
/// value. Every corruption of the dataset must be present at all severities;
/// gaps raise IncompletenessError naming each missing cell.
struct ErrorGrid {
    std::string dataset;
    double clean = 0.0;
    std::vector<std::string> corruptions;  // registry order
    std::map<std::string, std::array<double, Severity::kCount>> by_corruption;
    std::vector<std::string> warnings;
};

ErrorGrid compute_error_grid(const PredictionTable& table, const DatasetProfile& profile,
                             double threshold = 0.5);

/// Severity-summed scores for one corruption, normalized against a reference
/// model. `be` is sum(model)/sum(reference); `rbe` subtracts the respective
/// clean errors before summing. Ratios whose denominator is non-positive or
/// tiny are flagged undefined. Reported values are scaled by 100.
struct CorruptionScore {
    std::string corruption;
    CorruptionCategory category = CorruptionCategory::kDigital;
    std::array<double, Severity::kCount> raw{};  // model per-severity BE
    double be = 0.0;
    bool be_defined = false;
    double rbe = 0.0;
    bool rbe_defined = false;
};

struct CategorySummary {
    CorruptionCategory category = CorruptionCategory::kDigital;
    double be = 0.0;
    bool be_defined = false;
    double rbe = 0.0;
    bool rbe_defined = false;
};

struct RobustnessReport {
    std::string dataset;
    double clean = 0.0;            // model clean BE
    double reference_clean = 0.0;  // reference clean BE
    std::vector<CorruptionScore> scores;
    std::vector<CategorySummary> categories;
    double overall_be = 0.0;
    bool overall_be_defined = false;
    double overall_rbe = 0.0;
    bool overall_rbe_defined = false;
    std::vector<std::string> warnings;

    std::string to_json(int indent = 2) const;
    std::string to_markdown() const;
    std::string to_csv() const;
};

/// Denominator guards: sums below these thresholds leave the ratio undefined.
inline constexpr double kNormalizedGuard = 1e-9;
inline constexpr double kRelativeGuard = 1e-6;

RobustnessReport compute_report(const ErrorGrid& model, const ErrorGrid& reference,
                                const DatasetProfile& profile);

}  // namespace medc
