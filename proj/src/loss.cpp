#include "hiercloud/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hiercloud/error.hpp"

namespace hiercloud {

namespace {

constexpr double kLogFloor = 1e-12;

void check_weights(const LossWeights& w, std::size_t depth) {
    if (w.beta.size() != depth)
        fail("expected " + std::to_string(depth) + " beta weights, got " + std::to_string(w.beta.size()));
    if (w.gamma.size() + 1 != depth)
        fail("expected " + std::to_string(depth - 1) + " gamma weights, got " +
             std::to_string(w.gamma.size()));
    for (double b : w.beta)
        if (b < 0.0 || !std::isfinite(b)) fail("beta weights must be finite and non-negative");
    for (double g : w.gamma)
        if (g < 0.0 || !std::isfinite(g)) fail("gamma weights must be finite and non-negative");
}

void check_targets(const LevelDistributions& d, const LabelMatrix& targets) {
    if (targets.points != d.points)
        fail("targets cover " + std::to_string(targets.points) + " points, distributions " +
             std::to_string(d.points));
    if (targets.levels != d.depth())
        fail("targets have " + std::to_string(targets.levels) + " levels, distributions " +
             std::to_string(d.depth()));
    for (std::size_t i = 0; i < targets.points; ++i) {
        const auto row = targets.row(i);
        for (std::size_t lvl = 0; lvl < targets.levels; ++lvl)
            if (row[lvl] < 0 || static_cast<std::size_t>(row[lvl]) >= d.widths[lvl])
                fail("target class " + std::to_string(row[lvl]) + " out of range at level " +
                     std::to_string(lvl + 1) + ", point " + std::to_string(i));
    }
}

// Mean cross entropy of one level against its target column.
double level_cross_entropy(const LevelDistributions& d, const LabelMatrix& targets,
                           std::size_t level_idx) {
    double sum = 0.0;
    for (std::size_t i = 0; i < d.points; ++i) {
        const double p = d.row(level_idx, i)[targets.row(i)[level_idx]];
        sum += -std::log(std::max(p, kLogFloor));
    }
    return sum / static_cast<double>(d.points);
}

// Mean over points of the squared-hinge sum across the h -> h+1 edges.
double level_hinge(const LabelHierarchy& h, const LevelDistributions& d, std::size_t level_idx) {
    const int child_level = static_cast<int>(level_idx) + 2;
    double sum = 0.0;
    for (std::size_t i = 0; i < d.points; ++i) {
        const auto parent = d.row(level_idx, i);
        const auto child = d.row(level_idx + 1, i);
        for (std::size_t v = 0; v < child.size(); ++v) {
            const double viol = child[v] - parent[h.parent_index(child_level, static_cast<int>(v))];
            if (viol > 0.0) sum += viol * viol;
        }
    }
    return sum / static_cast<double>(d.points);
}

}  // namespace

LossValue prediction_loss(const LevelDistributions& d, const LabelMatrix& targets,
                          const LossWeights& w) {
    check_weights(w, d.depth());
    check_targets(d, targets);
    if (d.points == 0) fail("loss over an empty batch");
    LossValue out;
    out.level_ce.resize(d.depth());
    for (std::size_t lvl = 0; lvl < d.depth(); ++lvl) {
        out.level_ce[lvl] = level_cross_entropy(d, targets, lvl);
        out.prediction += w.beta[lvl] * out.level_ce[lvl];
    }
    out.total = out.prediction;
    return out;
}

LossValue consistency_loss(const LabelHierarchy& h, const LevelDistributions& d,
                           const LossWeights& w) {
    d.validate(h);
    check_weights(w, d.depth());
    if (d.points == 0) fail("loss over an empty batch");
    LossValue out;
    out.level_hinge.resize(d.depth() > 0 ? d.depth() - 1 : 0);
    for (std::size_t lvl = 0; lvl + 1 < d.depth(); ++lvl) {
        out.level_hinge[lvl] = level_hinge(h, d, lvl);
        out.consistency += w.gamma[lvl] * out.level_hinge[lvl];
    }
    out.total = out.consistency;
    return out;
}

LossValue total_loss(const LabelHierarchy& h, const LevelDistributions& d,
                     const LabelMatrix& targets, const LossWeights& w) {
    d.validate(h);
    LossValue pred = prediction_loss(d, targets, w);
    LossValue cons = consistency_loss(h, d, w);
    LossValue out;
    out.prediction = pred.prediction;
    out.consistency = cons.consistency;
    out.total = out.prediction + out.consistency;
    out.level_ce = std::move(pred.level_ce);
    out.level_hinge = std::move(cons.level_hinge);
    return out;
}

LevelDistributions softmax(const LevelDistributions& scores) {
    LevelDistributions out(scores.points, scores.widths);
    for (std::size_t lvl = 0; lvl < scores.depth(); ++lvl) {
        for (std::size_t i = 0; i < scores.points; ++i) {
            const auto src = scores.row(lvl, i);
            auto dst = out.row(lvl, i);
            const double peak = *std::max_element(src.begin(), src.end());
            double sum = 0.0;
            for (std::size_t j = 0; j < src.size(); ++j) {
                dst[j] = std::exp(src[j] - peak);
                sum += dst[j];
            }
            for (double& v : dst) v /= sum;
        }
    }
    out.normalized = true;
    return out;
}

std::vector<std::vector<double>> total_loss_grad(const LabelHierarchy& h,
                                                 const LevelDistributions& scores,
                                                 const LabelMatrix& targets, const LossWeights& w) {
    const std::size_t depth = scores.depth();
    check_weights(w, depth);
    for (std::size_t lvl = 0; lvl < depth; ++lvl)
        for (double s : scores.levels[lvl])
            if (!std::isfinite(s)) fail("non-finite score at level " + std::to_string(lvl + 1));

    const LevelDistributions probs = softmax(scores);
    probs.validate(h);
    check_targets(probs, targets);
    if (scores.points == 0) fail("loss over an empty batch");
    const double inv_n = 1.0 / static_cast<double>(scores.points);

    // dL/dp, accumulated across the cross-entropy and hinge terms, then
    // chained through the softmax Jacobian per row.
    std::vector<std::vector<double>> dp(depth);
    for (std::size_t lvl = 0; lvl < depth; ++lvl) dp[lvl].assign(probs.levels[lvl].size(), 0.0);

    for (std::size_t i = 0; i < scores.points; ++i) {
        const auto target = targets.row(i);
        for (std::size_t lvl = 0; lvl < depth; ++lvl) {
            const auto p = probs.row(lvl, i);
            const auto t = static_cast<std::size_t>(target[lvl]);
            // Below the floor the clamped cross entropy is flat in p.
            if (p[t] >= kLogFloor)
                dp[lvl][i * probs.widths[lvl] + t] -= w.beta[lvl] * inv_n / p[t];
        }
        for (std::size_t lvl = 0; lvl + 1 < depth; ++lvl) {
            const auto parent = probs.row(lvl, i);
            const auto child = probs.row(lvl + 1, i);
            const double scale = 2.0 * w.gamma[lvl] * inv_n;
            for (std::size_t v = 0; v < child.size(); ++v) {
                const int u = h.parent_index(static_cast<int>(lvl) + 2, static_cast<int>(v));
                const double viol = child[v] - parent[u];
                if (viol > 0.0) {
                    dp[lvl + 1][i * probs.widths[lvl + 1] + v] += scale * viol;
                    dp[lvl][i * probs.widths[lvl] + u] -= scale * viol;
                }
            }
        }
    }

    // ds_k = p_k * (g_k - sum_j g_j p_j)
    std::vector<std::vector<double>> out(depth);
    for (std::size_t lvl = 0; lvl < depth; ++lvl) {
        out[lvl].assign(probs.levels[lvl].size(), 0.0);
        for (std::size_t i = 0; i < scores.points; ++i) {
            const auto p = probs.row(lvl, i);
            const double* g = dp[lvl].data() + i * probs.widths[lvl];
            double dot = 0.0;
            for (std::size_t j = 0; j < p.size(); ++j) dot += g[j] * p[j];
            double* ds = out[lvl].data() + i * probs.widths[lvl];
            for (std::size_t j = 0; j < p.size(); ++j) ds[j] = p[j] * (g[j] - dot);
        }
    }
    return out;
}

}  // namespace hiercloud
