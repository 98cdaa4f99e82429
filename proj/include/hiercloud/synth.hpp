#pragma once

#include <cstdint>

#include "hiercloud/distributions.hpp"
#include "hiercloud/hierarchy.hpp"
#include "hiercloud/point_cloud.hpp"

namespace hiercloud {

enum class SynthGeometry { uniform_box, clustered };

// Everything else in the toolkit is exercised against data produced here:
// ground truth is fully consistent by construction, and the classifier
// corruption knobs create exactly the per-level disagreements the decoders
// and metrics are supposed to detect.
struct SynthSpec {
    std::size_t points = 1000;
    SynthGeometry geometry = SynthGeometry::uniform_box;
    double extent = 20.0;          // box edge (m); also the blob field size
    std::size_t blobs_per_leaf = 3;  // clustered mode only
    double blob_sigma = 0.5;       // blob spread (m)
    double label_noise = 0.0;      // chance a point's leaf label is re-drawn
    double inconsistency = 0.0;    // chance a point's levels are corrupted independently
    double sharpness = 8.0;        // concentration of mass on the target class
    std::uint64_t seed = 0;

    void validate() const;
};

// Cloud with one leaf-label column lifted into fully consistent tuples;
// clustered mode also emits one instance id per blob. Deterministic in
// (spec, seed) and independent of sharding.
struct SynthGroundTruth {
    PointCloud cloud;
    LabelMatrix labels;  // points x H, fully consistent
};

SynthGroundTruth gen_ground_truth(const LabelHierarchy& h, const SynthSpec& spec);

// Per-level distributions concentrated on the ground-truth class: the
// target gets (1+sharpness)/(W+sharpness) of the mass, the rest is spread
// evenly. With probability `inconsistency` a point's per-level targets are
// re-drawn independently first, which yields hierarchy violations under
// independent per-level argmax.
LevelDistributions gen_predictions(const LabelHierarchy& h, const SynthSpec& spec,
                                   const LabelMatrix& ground_truth);

}  // namespace hiercloud
