#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hiercloud {

// One class inside a hierarchy: granularity level (1-based) plus the
// class position in that level's ordered list.
struct ClassRef {
    int level = 1;
    int index = 0;
    friend bool operator==(const ClassRef&, const ClassRef&) = default;
};

// An H-tuple of per-level class indices for a single point.
using HierLabel = std::vector<std::int32_t>;

// Row-major (points x levels) matrix of class indices.
struct LabelMatrix {
    std::size_t points = 0;
    std::size_t levels = 0;
    std::vector<std::int32_t> values;

    LabelMatrix() = default;
    LabelMatrix(std::size_t n, std::size_t h)
        : points(n), levels(h), values(n * h, 0) {}

    std::span<const std::int32_t> row(std::size_t i) const {
        return {values.data() + i * levels, levels};
    }
    std::span<std::int32_t> row(std::size_t i) {
        return {values.data() + i * levels, levels};
    }
    friend bool operator==(const LabelMatrix&, const LabelMatrix&) = default;
};

// The levelled class tree: H ordered class lists plus a child->parent map
// between adjacent levels. Classes that persist across levels (e.g. a
// level-2 "construction" under the level-1 one) are ordinary nodes whose
// parent happens to carry the same name. Immutable once parsed; safe for
// concurrent readers.
class LabelHierarchy {
public:
    // Text format, line based:
    //   levels H
    //   level h: name,name,...        (one line per level, 1..H)
    //   ignore name                   (optional; names the excluded class)
    //   edge h:child -> h-1:parent    (one line per tree edge)
    // '#' starts a comment line. Throws Error on malformed input or a
    // structurally invalid tree (orphan, duplicate, multi-parent, ...).
    static LabelHierarchy parse(std::string_view text);
    static LabelHierarchy parse_file(const std::string& path);

    // Canonical text form; parse(serialize()) reconstructs an equal tree.
    std::string serialize() const;

    int depth() const { return static_cast<int>(level_names_.size()); }
    std::size_t level_size(int level) const { return level_names_[level - 1].size(); }
    const std::vector<std::string>& level_classes(int level) const {
        return level_names_[level - 1];
    }
    const std::string& class_name(ClassRef c) const {
        return level_names_[c.level - 1][c.index];
    }
    // Index of `name` at `level`, or nullopt.
    std::optional<int> find_class(int level, std::string_view name) const;

    // Parent index at level-1 of class `index` at `level` (level >= 2).
    int parent_index(int level, int index) const {
        return parent_of_[level - 2][index];
    }
    // Children at level+1 of class `index` at `level` (level <= H-1).
    const std::vector<int>& child_indices(int level, int index) const {
        return children_of_[level - 1][index];
    }

    // Index of the ignore class at `level`, or nullopt when none is set.
    std::optional<int> ignore_index(int level) const;
    const std::string& ignore_name() const { return ignore_name_; }
    bool has_ignore() const { return !ignore_name_.empty(); }

    // Unique ancestor of `c` at target_level (identity at c.level).
    ClassRef project(ClassRef c, int target_level) const;

    // True iff every adjacent (label[h], label[h+1]) pair is a tree edge.
    bool is_fully_consistent(std::span<const std::int32_t> label) const;

    // All root-to-leaf paths, one row per level-H class, in leaf order.
    const LabelMatrix& fc_paths() const { return fc_paths_; }
    std::size_t leaf_count() const { return level_names_.back().size(); }

    // Expands per-point leaf indices into full FC tuples.
    LabelMatrix lift_leaf_labels(std::span<const std::int32_t> leaf_labels) const;

    friend bool operator==(const LabelHierarchy& a, const LabelHierarchy& b) {
        return a.level_names_ == b.level_names_ && a.parent_of_ == b.parent_of_ &&
               a.ignore_name_ == b.ignore_name_;
    }

private:
    LabelHierarchy() = default;
    void validate_and_build();

    std::vector<std::vector<std::string>> level_names_;   // [h-1][index]
    std::vector<std::vector<int>> parent_of_;             // [h-2][child] -> parent
    std::vector<std::vector<std::vector<int>>> children_of_;  // [h-1][index]
    std::string ignore_name_;
    LabelMatrix fc_paths_;
};

}  // namespace hiercloud
