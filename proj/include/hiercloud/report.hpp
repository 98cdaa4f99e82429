#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hiercloud/hierarchy.hpp"
#include "hiercloud/metrics.hpp"

namespace hiercloud {

// Accumulated evaluation results for one method: per level OA, per-class
// IoU (nullopt = undefined) and mIoU, plus CR values over the requested
// alpha thresholds and optional per-class weighted coverage.
struct MetricReport {
    struct Level {
        double oa = 0.0;
        std::vector<std::optional<double>> class_iou;
        std::optional<double> miou;
        friend bool operator==(const Level&, const Level&) = default;
    };
    std::vector<Level> levels;
    std::vector<double> alphas;
    std::vector<double> cr;
    // Per-class WCov at wcov_level (nullopt = class not evaluated).
    int wcov_level = 0;
    std::vector<std::optional<double>> wcov;

    friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

// Evaluates predicted tuples against fully consistent ground truth.
// Points whose ground-truth class at a level is the ignore class are
// excluded at that level; CP/CR statistics exclude points whose
// ground-truth leaf is the ignore class.
MetricReport evaluate(const LabelHierarchy& h, const LabelMatrix& truth, const LabelMatrix& predicted,
                      std::span<const double> alphas, int threads = 1);

// Key-value text form, full precision; parses back losslessly.
std::string report_to_text(const MetricReport& report);
MetricReport report_from_text(std::string_view text);

// Aligned per-class table, one column per named method, percentages with
// one decimal. Undefined entries print as '-'.
std::string report_table(const LabelHierarchy& h,
                         const std::vector<std::pair<std::string, MetricReport>>& methods);

}  // namespace hiercloud
