#include "medc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "medc/errors.hpp"

namespace medc {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const std::string& text, int line_no, const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw DataError("prediction CSV line " + std::to_string(line_no) + ": bad " + what +
                        " value '" + text + "'");
    }
}

int parse_int(const std::string& text, int line_no, const char* what) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw DataError("prediction CSV line " + std::to_string(line_no) + ": bad " + what +
                        " value '" + text + "'");
    }
}

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string score_cell(bool defined, double value) { return defined ? fmt2(value * 100.0) : "n/a"; }

/// Mean over the defined entries; undefined when none are.
std::pair<double, bool> defined_mean(const std::vector<std::pair<double, bool>>& items) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [v, ok] : items) {
        if (!ok) continue;
        sum += v;
        ++n;
    }
    if (n == 0) return {0.0, false};
    return {sum / static_cast<double>(n), true};
}

}  // namespace

PredictionTable PredictionTable::parse_csv(const std::string& text, Task task, int num_classes) {
    if (num_classes < 2) throw ParamError("num_classes must be >= 2");
    PredictionTable table;
    table.task = task;
    table.num_classes = num_classes;

    std::istringstream ss(text);
    std::string line;
    int line_no = 0;

    std::string expected_header = "image_id,corruption,severity,true";
    for (int k = 0; k < num_classes; ++k) expected_header += ",score_" + std::to_string(k);

    while (std::getline(ss, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != expected_header) {
                throw DataError("prediction CSV header mismatch; expected '" + expected_header +
                                "'");
            }
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != static_cast<std::size_t>(4 + num_classes)) {
            throw DataError("prediction CSV line " + std::to_string(line_no) + ": expected " +
                            std::to_string(4 + num_classes) + " fields, got " +
                            std::to_string(fields.size()));
        }
        PredictionRow row;
        row.image_id = fields[0];
        row.corruption = fields[1];
        row.severity = parse_int(fields[2], line_no, "severity");
        if (row.image_id.empty() || row.corruption.empty()) {
            throw DataError("prediction CSV line " + std::to_string(line_no) +
                            ": empty image_id or corruption");
        }
        if (row.corruption == kCleanLabel) {
            if (row.severity != 0) {
                throw DataError("prediction CSV line " + std::to_string(line_no) +
                                ": clean rows must have severity 0");
            }
        } else if (row.severity < 1 || row.severity > static_cast<int>(Severity::kCount)) {
            throw DataError("prediction CSV line " + std::to_string(line_no) +
                            ": severity must be 1..5 for corrupted rows");
        }

        if (task == Task::kMultilabel) {
            const auto flags = split(fields[3], '|');
            if (flags.size() != static_cast<std::size_t>(num_classes)) {
                throw DataError("prediction CSV line " + std::to_string(line_no) + ": expected " +
                                std::to_string(num_classes) + " '|'-separated truth flags");
            }
            for (const auto& f : flags) {
                if (f != "0" && f != "1") {
                    throw DataError("prediction CSV line " + std::to_string(line_no) +
                                    ": truth flags must be 0 or 1");
                }
                row.truth.push_back(f == "1" ? 1 : 0);
            }
        } else {
            const int t = parse_int(fields[3], line_no, "true label");
            if (t < 0 || t >= num_classes) {
                throw DataError("prediction CSV line " + std::to_string(line_no) +
                                ": true label out of range");
            }
            row.truth.push_back(t);
        }

        for (int k = 0; k < num_classes; ++k) {
            row.scores.push_back(parse_double(fields[4 + k], line_no, "score"));
        }
        table.rows.push_back(std::move(row));
    }
    if (line_no == 0) throw DataError("prediction CSV is empty");
    return table;
}

PredictionTable PredictionTable::load(const std::string& path, Task task, int num_classes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open prediction file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), task, num_classes);
}

BalancedError balanced_error(const std::vector<const PredictionRow*>& rows, Task task,
                             int num_classes, double threshold) {
    if (rows.empty()) throw DataError("balanced error of an empty stratum is undefined");
    BalancedError out;

    if (task == Task::kMultilabel) {
        double label_sum = 0.0;
        for (int l = 0; l < num_classes; ++l) {
            std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
            for (const PredictionRow* row : rows) {
                const bool truth = row->truth[static_cast<std::size_t>(l)] != 0;
                const bool pred = row->scores[static_cast<std::size_t>(l)] >= threshold;
                if (truth) {
                    pred ? ++tp : ++fn;
                } else {
                    pred ? ++fp : ++tn;
                }
            }
            const std::size_t pos = tp + fn, neg = tn + fp;
            double be_l;
            if (pos > 0 && neg > 0) {
                const double recall_pos = static_cast<double>(tp) / static_cast<double>(pos);
                const double recall_neg = static_cast<double>(tn) / static_cast<double>(neg);
                be_l = 1.0 - 0.5 * (recall_pos + recall_neg);
            } else if (pos > 0) {
                be_l = 1.0 - static_cast<double>(tp) / static_cast<double>(pos);
                out.warnings.push_back("label " + std::to_string(l) +
                                       " has no negative examples; using positive recall only");
            } else {
                be_l = 1.0 - static_cast<double>(tn) / static_cast<double>(neg);
                out.warnings.push_back("label " + std::to_string(l) +
                                       " has no positive examples; using negative recall only");
            }
            label_sum += be_l;
        }
        out.value = label_sum / num_classes;
        return out;
    }

    std::vector<std::size_t> support(static_cast<std::size_t>(num_classes), 0);
    std::vector<std::size_t> correct(static_cast<std::size_t>(num_classes), 0);
    for (const PredictionRow* row : rows) {
        int pred = 0;
        for (int k = 1; k < num_classes; ++k) {
            if (row->scores[static_cast<std::size_t>(k)] >
                row->scores[static_cast<std::size_t>(pred)]) {
                pred = k;  // ties keep the lowest class index
            }
        }
        const int truth = row->truth[0];
        ++support[static_cast<std::size_t>(truth)];
        if (pred == truth) ++correct[static_cast<std::size_t>(truth)];
    }

    double recall_sum = 0.0;
    int present = 0;
    for (int k = 0; k < num_classes; ++k) {
        if (support[static_cast<std::size_t>(k)] == 0) {
            out.warnings.push_back("class " + std::to_string(k) +
                                   " has no examples; excluded from balanced error");
            continue;
        }
        recall_sum += static_cast<double>(correct[static_cast<std::size_t>(k)]) /
                      static_cast<double>(support[static_cast<std::size_t>(k)]);
        ++present;
    }
    if (present == 0) throw DataError("no class has any examples in this stratum");
    out.value = 1.0 - recall_sum / present;
    return out;
}

ErrorGrid compute_error_grid(const PredictionTable& table, const DatasetProfile& profile,
                             double threshold) {
    ErrorGrid grid;
    grid.dataset = profile.id;
    grid.corruptions.reserve(profile.corruptions.size());
    for (const auto& c : profile.corruptions) grid.corruptions.push_back(c.id);

    std::map<std::pair<std::string, int>, std::vector<const PredictionRow*>> groups;
    for (const auto& row : table.rows) {
        if (row.corruption != kCleanLabel && !profile.has_corruption(row.corruption)) {
            throw DataError("predictions contain corruption '" + row.corruption +
                            "' which is not in the corruption set of dataset '" + profile.id +
                            "'");
        }
        groups[{row.corruption, row.severity}].push_back(&row);
    }

    std::vector<std::string> missing;
    if (!groups.count({std::string(kCleanLabel), 0})) missing.emplace_back(kCleanLabel);
    for (const auto& cid : grid.corruptions) {
        for (int s = 1; s <= static_cast<int>(Severity::kCount); ++s) {
            if (!groups.count({cid, s})) missing.push_back(cid + "/" + std::to_string(s));
        }
    }
    if (!missing.empty()) {
        std::string joined;
        for (const auto& m : missing) {
            if (!joined.empty()) joined += ", ";
            joined += m;
        }
        throw IncompletenessError("prediction grid incomplete for dataset '" + profile.id +
                                  "'; missing strata: " + joined);
    }

    auto eval = [&](const std::string& corruption, int severity) {
        const auto& rows = groups.at({corruption, severity});
        BalancedError be = balanced_error(rows, table.task, table.num_classes, threshold);
        const std::string stratum =
            corruption == kCleanLabel ? std::string(kCleanLabel)
                                      : corruption + "/s" + std::to_string(severity);
        for (const auto& w : be.warnings) grid.warnings.push_back(stratum + ": " + w);
        return be.value;
    };

    grid.clean = eval(std::string(kCleanLabel), 0);
    for (const auto& cid : grid.corruptions) {
        auto& arr = grid.by_corruption[cid];
        for (int s = 1; s <= static_cast<int>(Severity::kCount); ++s) {
            arr[static_cast<std::size_t>(s - 1)] = eval(cid, s);
        }
    }
    return grid;
}

RobustnessReport compute_report(const ErrorGrid& model, const ErrorGrid& reference,
                                const DatasetProfile& profile) {
    if (model.corruptions != reference.corruptions) {
        throw DataError("model and reference grids cover different corruption sets");
    }
    RobustnessReport report;
    report.dataset = profile.id;
    report.clean = model.clean;
    report.reference_clean = reference.clean;
    report.warnings = model.warnings;
    for (const auto& w : reference.warnings) report.warnings.push_back("reference: " + w);

    for (const auto& cid : model.corruptions) {
        const auto& m = model.by_corruption.at(cid);
        const auto& r = reference.by_corruption.at(cid);
        CorruptionScore score;
        score.corruption = cid;
        score.category = Registry::corruption_meta(cid).category;
        score.raw = m;

        double m_sum = 0.0, r_sum = 0.0, m_rel = 0.0, r_rel = 0.0;
        for (std::size_t s = 0; s < Severity::kCount; ++s) {
            m_sum += m[s];
            r_sum += r[s];
            m_rel += m[s] - model.clean;
            r_rel += r[s] - reference.clean;
        }
        if (r_sum > kNormalizedGuard) {
            score.be = m_sum / r_sum;
            score.be_defined = true;
        } else {
            report.warnings.push_back(cid +
                                      ": reference errors sum to ~0; normalized score undefined");
        }
        if (r_rel > kRelativeGuard) {
            score.rbe = m_rel / r_rel;
            score.rbe_defined = true;
        } else {
            report.warnings.push_back(
                cid + ": reference degradation non-positive or ~0; relative score undefined");
        }
        report.scores.push_back(std::move(score));
    }

    std::vector<std::pair<double, bool>> all_be, all_rbe;
    for (const auto& s : report.scores) {
        all_be.emplace_back(s.be, s.be_defined);
        all_rbe.emplace_back(s.rbe, s.rbe_defined);
    }
    std::tie(report.overall_be, report.overall_be_defined) = defined_mean(all_be);
    std::tie(report.overall_rbe, report.overall_rbe_defined) = defined_mean(all_rbe);

    for (const auto cat :
         {CorruptionCategory::kDigital, CorruptionCategory::kNoise, CorruptionCategory::kBlur,
          CorruptionCategory::kColor, CorruptionCategory::kTaskSpecific}) {
        std::vector<std::pair<double, bool>> cat_be, cat_rbe;
        for (const auto& s : report.scores) {
            if (s.category != cat) continue;
            cat_be.emplace_back(s.be, s.be_defined);
            cat_rbe.emplace_back(s.rbe, s.rbe_defined);
        }
        if (cat_be.empty()) continue;  // category absent from this dataset
        CategorySummary summary;
        summary.category = cat;
        std::tie(summary.be, summary.be_defined) = defined_mean(cat_be);
        std::tie(summary.rbe, summary.rbe_defined) = defined_mean(cat_rbe);
        report.categories.push_back(summary);
    }
    return report;
}

std::string RobustnessReport::to_json(int indent) const {
    nlohmann::json root;
    root["dataset"] = dataset;
    root["clean_balanced_error"] = clean;
    root["reference_clean_balanced_error"] = reference_clean;
    nlohmann::json scores_json = nlohmann::json::array();
    for (const auto& s : scores) {
        nlohmann::json js;
        js["corruption"] = s.corruption;
        js["category"] = std::string(to_string(s.category));
        js["balanced_errors"] = s.raw;
        if (s.be_defined) {
            js["be"] = s.be * 100.0;
        } else {
            js["be"] = nullptr;
        }
        if (s.rbe_defined) {
            js["rbe"] = s.rbe * 100.0;
        } else {
            js["rbe"] = nullptr;
        }
        scores_json.push_back(std::move(js));
    }
    root["corruptions"] = std::move(scores_json);
    nlohmann::json cats_json = nlohmann::json::array();
    for (const auto& c : categories) {
        nlohmann::json jc;
        jc["category"] = std::string(to_string(c.category));
        jc["be"] = c.be_defined ? nlohmann::json(c.be * 100.0) : nlohmann::json(nullptr);
        jc["rbe"] = c.rbe_defined ? nlohmann::json(c.rbe * 100.0) : nlohmann::json(nullptr);
        cats_json.push_back(std::move(jc));
    }
    root["categories"] = std::move(cats_json);
    root["overall"] = {
        {"be", overall_be_defined ? nlohmann::json(overall_be * 100.0) : nlohmann::json(nullptr)},
        {"rbe",
         overall_rbe_defined ? nlohmann::json(overall_rbe * 100.0) : nlohmann::json(nullptr)},
    };
    root["warnings"] = warnings;
    return root.dump(indent);
}

std::string RobustnessReport::to_markdown() const {
    std::ostringstream out;
    out << "# Robustness report: " << dataset << "\n\n";
    out << "Clean balanced error: " << fmt2(clean * 100.0)
        << " (reference: " << fmt2(reference_clean * 100.0) << ")\n\n";
    out << "| Corruption | Category | BE | rBE |\n";
    out << "|---|---|---:|---:|\n";
    for (const auto& s : scores) {
        out << "| " << s.corruption << " | " << to_string(s.category) << " | "
            << score_cell(s.be_defined, s.be) << " | " << score_cell(s.rbe_defined, s.rbe)
            << " |\n";
    }
    out << "\n| Category | BE | rBE |\n";
    out << "|---|---:|---:|\n";
    for (const auto& c : categories) {
        out << "| " << to_string(c.category) << " | " << score_cell(c.be_defined, c.be) << " | "
            << score_cell(c.rbe_defined, c.rbe) << " |\n";
    }
    out << "\nOverall BE: " << score_cell(overall_be_defined, overall_be)
        << "  |  Overall rBE: " << score_cell(overall_rbe_defined, overall_rbe) << "\n";
    if (!warnings.empty()) {
        out << "\nWarnings:\n";
        for (const auto& w : warnings) out << "- " << w << "\n";
    }
    return out.str();
}

std::string RobustnessReport::to_csv() const {
    std::ostringstream out;
    out << "corruption,category,be,rbe\n";
    auto cell = [](bool defined, double v) { return defined ? fmt2(v * 100.0) : std::string(); };
    for (const auto& s : scores) {
        out << s.corruption << ',' << to_string(s.category) << ',' << cell(s.be_defined, s.be)
            << ',' << cell(s.rbe_defined, s.rbe) << '\n';
    }
    out << "overall,," << cell(overall_be_defined, overall_be) << ','
        << cell(overall_rbe_defined, overall_rbe) << '\n';
    return out.str();
}

}  // namespace medc
