#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hiercloud/hierarchy.hpp"

namespace hiercloud {

// CP is always a rational number of matched levels over H; keep the
// integer pair so threshold comparisons stay exact.
struct ConsistencyProportion {
    int matched = 0;
    int levels = 1;
    double value() const { return static_cast<double>(matched) / levels; }
    // CP >= alpha without going through the quotient.
    bool at_least(double alpha) const { return static_cast<double>(matched) >= alpha * levels; }
};

// Best per-level agreement between `label` and any root-to-leaf path,
// over H. Computed by pushing match counts down the tree, not by
// enumerating paths.
ConsistencyProportion consistency_proportion(const LabelHierarchy& h,
                                             std::span<const std::int32_t> label);

// Histogram-backed accumulator: integer counts merge associatively, the
// division happens only in the queries.
class ConsistencyAccumulator {
public:
    explicit ConsistencyAccumulator(int depth) : hist_(depth + 1, 0) {}

    void add(const ConsistencyProportion& cp) { ++hist_[cp.matched]; }
    void accumulate(const LabelHierarchy& h, const LabelMatrix& labels);
    void merge(const ConsistencyAccumulator& other);

    std::int64_t count() const;
    // Fraction of points with CP >= alpha; throws on an empty accumulator.
    double consistency_rate(double alpha) const;
    const std::vector<std::int64_t>& histogram() const { return hist_; }

private:
    std::vector<std::int64_t> hist_;  // hist_[k] = points with k matched levels
};

struct ConsistencyStats {
    std::vector<ConsistencyProportion> per_point;
    std::vector<std::int64_t> histogram;
    std::vector<double> alphas;
    std::vector<double> cr;  // aligned with alphas
};

ConsistencyStats consistency_stats(const LabelHierarchy& h, const LabelMatrix& labels,
                                   std::span<const double> alphas);

// CR over an array of labels for one threshold; throws on empty input.
double consistency_rate(const LabelHierarchy& h, const LabelMatrix& labels, double alpha);

// Confusion counts for one granularity level; rows are ground truth,
// columns prediction. Points whose ground truth is the ignore class are
// counted in `ignored` and never enter the matrix; ignore-class
// predictions over real ground truth stay in the matrix as errors.
class LevelConfusion {
public:
    LevelConfusion(int level, std::size_t class_count, std::optional<int> ignore_index)
        : level_(level), classes_(class_count), ignore_(ignore_index),
          counts_(class_count * class_count, 0) {}

    void add(std::int32_t truth, std::int32_t predicted);
    void accumulate(std::span<const std::int32_t> truth, std::span<const std::int32_t> predicted);
    void merge(const LevelConfusion& other);

    int level() const { return level_; }
    std::size_t class_count() const { return classes_; }
    std::optional<int> ignore_index() const { return ignore_; }
    std::int64_t at(std::size_t truth, std::size_t predicted) const {
        return counts_[truth * classes_ + predicted];
    }
    std::int64_t ignored() const { return ignored_; }
    std::int64_t total() const;

private:
    int level_;
    std::size_t classes_;
    std::optional<int> ignore_;
    std::vector<std::int64_t> counts_;
    std::int64_t ignored_ = 0;
};

// Trace over total, ignore-class ground truth excluded; throws when every
// point was ignored.
double overall_accuracy(const LevelConfusion& conf);

// TP/(TP+FP+FN) per class; nullopt marks a class absent from both sides
// (excluded from the mean); the ignore class is always nullopt.
std::vector<std::optional<double>> per_class_iou(const LevelConfusion& conf);

// Mean of the defined per-class IoUs; throws when none is defined.
double mean_iou(const LevelConfusion& conf);

// Per-point instance ids restricted to one class at one level; -1 means
// "not part of any instance".
struct InstanceSet {
    std::vector<std::int32_t> ids;
};

// Size-weighted coverage of ground-truth instances by their best-matching
// predicted instance: sum_i w_i * max_j IoU(g_i, p_j) with w_i the ground
// truth instance share. Throws when the ground truth has no instances.
double wcov(const InstanceSet& truth, const InstanceSet& predicted);

}  // namespace hiercloud
