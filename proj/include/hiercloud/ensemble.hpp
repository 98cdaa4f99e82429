#pragma once

#include <vector>

#include "hiercloud/distributions.hpp"
#include "hiercloud/hierarchy.hpp"

namespace hiercloud {

// Decodes each point to the root-to-leaf path maximizing the per-level
// likelihood sum. Scores are accumulated root-to-leaf along the tree
// (O(|C|) per point) rather than per enumerated path; ties go to the
// smallest leaf index. Output rows are always fully consistent.
//
// `level_weights`, when nonempty, scales each level's contribution; the
// decoding rule itself is an unweighted sum (all weights 1).
LabelMatrix hierarchical_ensemble(const LabelHierarchy& h, const LevelDistributions& d,
                                  std::span<const double> level_weights = {}, int threads = 1);

// Baseline: independent per-level argmax (ties to the smallest class
// index). Output may violate the hierarchy.
LabelMatrix mc_decision(const LabelHierarchy& h, const LevelDistributions& d, int threads = 1);

}  // namespace hiercloud
