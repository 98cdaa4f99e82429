#include "hiercloud/ensemble.hpp"

#include <string>

#include "hiercloud/error.hpp"
#include "hiercloud/parallel.hpp"

namespace hiercloud {

LabelMatrix hierarchical_ensemble(const LabelHierarchy& h, const LevelDistributions& d,
                                  std::span<const double> level_weights, int threads) {
    d.validate_shape(h);
    const auto depth = static_cast<std::size_t>(h.depth());
    if (!level_weights.empty() && level_weights.size() != depth)
        fail("expected " + std::to_string(depth) + " level weights, got " +
             std::to_string(level_weights.size()));

    const auto& paths = h.fc_paths();
    LabelMatrix out(d.points, depth);

    parallel_chunks(d.points, threads, [&](std::size_t begin, std::size_t end, std::size_t) {
        // Per-point prefix scores pushed root to leaf; acc[j] at level h is
        // the score of the unique partial path ending at class j. Rows not
        // marked normalized are treated as scores and divided by their sum,
        // so the decision is always over probabilities.
        std::vector<std::vector<double>> acc(depth);
        for (std::size_t lvl = 0; lvl < depth; ++lvl) acc[lvl].resize(d.widths[lvl]);
        const auto row_scale = [&d](std::size_t lvl, std::size_t i) {
            if (d.normalized) return 1.0;
            double sum = 0.0;
            for (double v : d.row(lvl, i)) sum += v;
            if (sum <= 0.0)
                fail("all-zero likelihood row at level " + std::to_string(lvl + 1) + ", point " +
                     std::to_string(i));
            return 1.0 / sum;
        };

        for (std::size_t i = begin; i < end; ++i) {
            const auto top = d.row(0, i);
            const double w0 = (level_weights.empty() ? 1.0 : level_weights[0]) * row_scale(0, i);
            for (std::size_t j = 0; j < d.widths[0]; ++j) acc[0][j] = w0 * top[j];
            for (std::size_t lvl = 1; lvl < depth; ++lvl) {
                const auto p = d.row(lvl, i);
                const double w = (level_weights.empty() ? 1.0 : level_weights[lvl]) * row_scale(lvl, i);
                const auto& parents = acc[lvl - 1];
                for (std::size_t j = 0; j < d.widths[lvl]; ++j)
                    acc[lvl][j] = parents[h.parent_index(static_cast<int>(lvl) + 1, static_cast<int>(j))] + w * p[j];
            }
            // Ties resolve to the smallest leaf index: only a strictly
            // greater score displaces the running best.
            const auto& leaf_scores = acc[depth - 1];
            std::size_t best = 0;
            for (std::size_t j = 1; j < leaf_scores.size(); ++j)
                if (leaf_scores[j] > leaf_scores[best]) best = j;
            const auto path = paths.row(best);
            std::copy(path.begin(), path.end(), out.row(i).begin());
        }
    });
    return out;
}

LabelMatrix mc_decision(const LabelHierarchy& h, const LevelDistributions& d, int threads) {
    d.validate_shape(h);
    const auto depth = static_cast<std::size_t>(h.depth());
    LabelMatrix out(d.points, depth);
    parallel_chunks(d.points, threads, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t i = begin; i < end; ++i) {
            auto dst = out.row(i);
            for (std::size_t lvl = 0; lvl < depth; ++lvl) {
                const auto p = d.row(lvl, i);
                std::size_t best = 0;
                for (std::size_t j = 1; j < p.size(); ++j)
                    if (p[j] > p[best]) best = j;
                dst[lvl] = static_cast<std::int32_t>(best);
            }
        }
    });
    return out;
}

}  // namespace hiercloud
