#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hiercloud {

// Columnar XYZ cloud with optional per-point color, hierarchical label
// indices (one column per stored level) and instance ids. Optional columns
// are either empty or exactly size() long.
struct PointCloud {
    std::vector<double> x, y, z;
    std::vector<std::uint8_t> r, g, b;
    std::vector<std::vector<std::int16_t>> label_columns;
    std::vector<std::int32_t> instance;

    std::size_t size() const { return x.size(); }
    bool has_color() const { return !r.empty(); }
    bool has_labels() const { return !label_columns.empty(); }
    std::size_t label_levels() const { return label_columns.size(); }
    bool has_instances() const { return !instance.empty(); }

    // Throws Error on ragged columns or non-finite coordinates.
    void validate() const;

    // New cloud holding the selected points (all present columns carried
    // over, in index order).
    PointCloud subset(std::span<const std::size_t> indices) const;

    friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

}  // namespace hiercloud
