#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "hiercloud/hierarchy.hpp"

namespace hiercloud {

// Per-level predicted likelihoods for a batch of points: one row-major
// N x |C^h| matrix per granularity level. `normalized` marks rows as
// probability vectors (sum 1 within 1e-6).
struct LevelDistributions {
    std::size_t points = 0;
    std::vector<std::size_t> widths;
    std::vector<std::vector<double>> levels;  // [h-1], row-major
    bool normalized = false;

    LevelDistributions() = default;
    LevelDistributions(std::size_t n, std::vector<std::size_t> w)
        : points(n), widths(std::move(w)) {
        levels.reserve(widths.size());
        for (auto width : widths) levels.emplace_back(n * width, 0.0);
    }

    std::size_t depth() const { return widths.size(); }
    std::span<const double> row(std::size_t level_idx, std::size_t point) const {
        return {levels[level_idx].data() + point * widths[level_idx], widths[level_idx]};
    }
    std::span<double> row(std::size_t level_idx, std::size_t point) {
        return {levels[level_idx].data() + point * widths[level_idx], widths[level_idx]};
    }

    // Shape check against a hierarchy; throws Error on width/payload
    // mismatch or non-finite/negative entries.
    void validate_shape(const LabelHierarchy& h) const;

    // validate_shape plus, when marked normalized, row sums within
    // 1 +/- 1e-6.
    void validate(const LabelHierarchy& h) const;

    // Divides every row by its sum and sets `normalized`.
    void normalize_rows();
};

}  // namespace hiercloud
