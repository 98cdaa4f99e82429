#include "hiercloud/metrics.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

#include "hiercloud/error.hpp"

namespace hiercloud {

ConsistencyProportion consistency_proportion(const LabelHierarchy& h,
                                             std::span<const std::int32_t> label) {
    const int depth = h.depth();
    if (label.size() != static_cast<std::size_t>(depth))
        fail("label has " + std::to_string(label.size()) + " levels, hierarchy has " +
             std::to_string(depth));
    // match[j] = best agreement count over the partial path ending at class
    // j of the current level; the maximum over leaves is the CP numerator.
    std::vector<int> match(h.level_size(1));
    for (std::size_t j = 0; j < match.size(); ++j)
        match[j] = (label[0] == static_cast<std::int32_t>(j)) ? 1 : 0;
    for (int lvl = 2; lvl <= depth; ++lvl) {
        std::vector<int> next(h.level_size(lvl));
        for (std::size_t j = 0; j < next.size(); ++j) {
            const int agree = label[lvl - 1] == static_cast<std::int32_t>(j) ? 1 : 0;
            next[j] = match[h.parent_index(lvl, static_cast<int>(j))] + agree;
        }
        match.swap(next);
    }
    return {*std::max_element(match.begin(), match.end()), depth};
}

void ConsistencyAccumulator::accumulate(const LabelHierarchy& h, const LabelMatrix& labels) {
    for (std::size_t i = 0; i < labels.points; ++i) add(consistency_proportion(h, labels.row(i)));
}

void ConsistencyAccumulator::merge(const ConsistencyAccumulator& other) {
    if (other.hist_.size() != hist_.size()) fail("cannot merge consistency accumulators of different depth");
    for (std::size_t k = 0; k < hist_.size(); ++k) hist_[k] += other.hist_[k];
}

std::int64_t ConsistencyAccumulator::count() const {
    std::int64_t n = 0;
    for (auto c : hist_) n += c;
    return n;
}

double ConsistencyAccumulator::consistency_rate(double alpha) const {
    const std::int64_t n = count();
    if (n == 0) fail("consistency rate over an empty label set");
    const int depth = static_cast<int>(hist_.size()) - 1;
    std::int64_t hits = 0;
    for (int k = 0; k <= depth; ++k)
        if (ConsistencyProportion{k, depth}.at_least(alpha)) hits += hist_[k];
    return static_cast<double>(hits) / static_cast<double>(n);
}

ConsistencyStats consistency_stats(const LabelHierarchy& h, const LabelMatrix& labels,
                                   std::span<const double> alphas) {
    ConsistencyStats stats;
    stats.per_point.reserve(labels.points);
    ConsistencyAccumulator acc(h.depth());
    for (std::size_t i = 0; i < labels.points; ++i) {
        stats.per_point.push_back(consistency_proportion(h, labels.row(i)));
        acc.add(stats.per_point.back());
    }
    stats.histogram = acc.histogram();
    stats.alphas.assign(alphas.begin(), alphas.end());
    for (double a : alphas) stats.cr.push_back(acc.consistency_rate(a));
    return stats;
}

double consistency_rate(const LabelHierarchy& h, const LabelMatrix& labels, double alpha) {
    ConsistencyAccumulator acc(h.depth());
    acc.accumulate(h, labels);
    return acc.consistency_rate(alpha);
}

void LevelConfusion::add(std::int32_t truth, std::int32_t predicted) {
    if (truth < 0 || static_cast<std::size_t>(truth) >= classes_ || predicted < 0 ||
        static_cast<std::size_t>(predicted) >= classes_)
        fail("confusion index out of range at level " + std::to_string(level_));
    if (ignore_ && truth == *ignore_) {
        ++ignored_;
        return;
    }
    ++counts_[static_cast<std::size_t>(truth) * classes_ + static_cast<std::size_t>(predicted)];
}

void LevelConfusion::accumulate(std::span<const std::int32_t> truth,
                                std::span<const std::int32_t> predicted) {
    if (truth.size() != predicted.size()) fail("truth and prediction lengths differ");
    for (std::size_t i = 0; i < truth.size(); ++i) add(truth[i], predicted[i]);
}

void LevelConfusion::merge(const LevelConfusion& other) {
    if (other.classes_ != classes_ || other.level_ != level_ || other.ignore_ != ignore_)
        fail("cannot merge confusion matrices with different shapes");
    for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
    ignored_ += other.ignored_;
}

std::int64_t LevelConfusion::total() const {
    std::int64_t n = 0;
    for (auto c : counts_) n += c;
    return n;
}

double overall_accuracy(const LevelConfusion& conf) {
    const std::int64_t total = conf.total();
    if (total == 0) fail("overall accuracy: no evaluated points at level " + std::to_string(conf.level()));
    std::int64_t correct = 0;
    for (std::size_t c = 0; c < conf.class_count(); ++c) correct += conf.at(c, c);
    return static_cast<double>(correct) / static_cast<double>(total);
}

std::vector<std::optional<double>> per_class_iou(const LevelConfusion& conf) {
    const std::size_t n = conf.class_count();
    std::vector<std::optional<double>> out(n);
    for (std::size_t c = 0; c < n; ++c) {
        if (conf.ignore_index() && static_cast<int>(c) == *conf.ignore_index()) continue;
        std::int64_t tp = conf.at(c, c);
        std::int64_t fp = 0, fn = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == c) continue;
            fp += conf.at(k, c);
            fn += conf.at(c, k);
        }
        const std::int64_t uni = tp + fp + fn;
        if (uni == 0) continue;  // absent from both sides: undefined
        out[c] = static_cast<double>(tp) / static_cast<double>(uni);
    }
    return out;
}

double mean_iou(const LevelConfusion& conf) {
    const auto ious = per_class_iou(conf);
    double sum = 0.0;
    std::size_t defined = 0;
    for (const auto& iou : ious)
        if (iou) {
            sum += *iou;
            ++defined;
        }
    if (defined == 0) fail("mean IoU: no class defined at level " + std::to_string(conf.level()));
    return sum / static_cast<double>(defined);
}

double wcov(const InstanceSet& truth, const InstanceSet& predicted) {
    if (truth.ids.size() != predicted.ids.size()) fail("instance sets cover different point counts");
    std::unordered_map<std::int32_t, std::int64_t> truth_size, pred_size;
    for (auto id : truth.ids)
        if (id >= 0) ++truth_size[id];
    for (auto id : predicted.ids)
        if (id >= 0) ++pred_size[id];
    if (truth_size.empty()) fail("weighted coverage: ground truth has no instances");

    // Overlap counts per (gt, pred) id pair.
    std::unordered_map<std::int64_t, std::int64_t> overlap;
    for (std::size_t i = 0; i < truth.ids.size(); ++i) {
        const auto g = truth.ids[i];
        const auto p = predicted.ids[i];
        if (g >= 0 && p >= 0)
            ++overlap[(static_cast<std::int64_t>(g) << 32) | static_cast<std::uint32_t>(p)];
    }
    std::unordered_map<std::int32_t, double> best_iou;
    for (const auto& [key, inter] : overlap) {
        const auto g = static_cast<std::int32_t>(key >> 32);
        const auto p = static_cast<std::int32_t>(key & 0xffffffff);
        const std::int64_t uni = truth_size[g] + pred_size[p] - inter;
        const double iou = static_cast<double>(inter) / static_cast<double>(uni);
        auto& slot = best_iou[g];
        slot = std::max(slot, iou);
    }

    // Weighted sum in ascending gt-id order so the float accumulation is
    // identical under point permutation.
    std::vector<std::int32_t> gt_ids;
    gt_ids.reserve(truth_size.size());
    std::int64_t total = 0;
    for (const auto& [id, size] : truth_size) {
        gt_ids.push_back(id);
        total += size;
    }
    std::sort(gt_ids.begin(), gt_ids.end());
    double cov = 0.0;
    for (auto id : gt_ids) {
        const auto it = best_iou.find(id);
        const double best = it == best_iou.end() ? 0.0 : it->second;
        cov += (static_cast<double>(truth_size[id]) / static_cast<double>(total)) * best;
    }
    return cov;
}

}  // namespace hiercloud
