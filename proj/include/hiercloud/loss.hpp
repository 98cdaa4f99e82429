#pragma once

#include <vector>

#include "hiercloud/distributions.hpp"
#include "hiercloud/hierarchy.hpp"

namespace hiercloud {

// Per-level loss weights: beta scales the level cross entropies, gamma the
// level-pair consistency penalties.
struct LossWeights {
    std::vector<double> beta;   // size H
    std::vector<double> gamma;  // size H-1

    static LossWeights defaults(int depth, double beta_value = 1.0, double gamma_value = 0.05) {
        return {std::vector<double>(depth, beta_value),
                std::vector<double>(depth > 0 ? depth - 1 : 0, gamma_value)};
    }
};

struct LossValue {
    double total = 0.0;
    double prediction = 0.0;
    double consistency = 0.0;
    // Unweighted per-level means: level_ce[h-1] is the mean cross entropy of
    // level h, level_hinge[h-1] the mean squared-hinge sum between levels h
    // and h+1.
    std::vector<double> level_ce;
    std::vector<double> level_hinge;
};

// Sum over levels of beta_h times the mean cross entropy -log P^h(target).
// Probabilities are floored at 1e-12 before the log.
LossValue prediction_loss(const LevelDistributions& d, const LabelMatrix& targets,
                          const LossWeights& w);

// Squared-hinge penalty on every tree edge where the child class
// probability exceeds its parent's, averaged over points:
//   sum_h gamma_h * mean_i sum_{(u,v) edge} max(P^{h+1}(v) - P^h(u), 0)^2
LossValue consistency_loss(const LabelHierarchy& h, const LevelDistributions& d,
                           const LossWeights& w);

// prediction_loss + consistency_loss. With all gamma = 0 this reduces to
// the prediction term bit for bit (the no-consistency ablation).
LossValue total_loss(const LabelHierarchy& h, const LevelDistributions& d,
                     const LabelMatrix& targets, const LossWeights& w);

// Row-wise softmax over pre-activation scores.
LevelDistributions softmax(const LevelDistributions& scores);

// Exact gradient of total_loss(softmax(scores)) with respect to the
// scores; output shapes match the input. Throws on non-finite scores.
std::vector<std::vector<double>> total_loss_grad(const LabelHierarchy& h,
                                                 const LevelDistributions& scores,
                                                 const LabelMatrix& targets, const LossWeights& w);

}  // namespace hiercloud
