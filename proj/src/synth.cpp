#include "hiercloud/synth.hpp"

#include <array>
#include <cmath>
#include <string>

#include "hiercloud/error.hpp"
#include "hiercloud/rng.hpp"

namespace hiercloud {

namespace {

// Distinct stream salts so ground truth, geometry and predictions never
// share draws even for the same (seed, point).
constexpr std::uint64_t kGeometrySalt = 0x67656f6d;
constexpr std::uint64_t kLabelSalt = 0x6c61626c;
constexpr std::uint64_t kPredSalt = 0x70726564;

}  // namespace

void SynthSpec::validate() const {
    if (points == 0) fail("synth spec: point count must be positive");
    if (label_noise < 0.0 || label_noise > 1.0) fail("synth spec: label noise must be in [0,1]");
    if (inconsistency < 0.0 || inconsistency > 1.0) fail("synth spec: inconsistency must be in [0,1]");
    if (sharpness <= 0.0) fail("synth spec: sharpness must be positive");
    if (extent <= 0.0) fail("synth spec: extent must be positive");
    if (geometry == SynthGeometry::clustered && blobs_per_leaf == 0)
        fail("synth spec: clustered mode needs at least one blob per leaf");
    if (blob_sigma <= 0.0) fail("synth spec: blob sigma must be positive");
}

SynthGroundTruth gen_ground_truth(const LabelHierarchy& h, const SynthSpec& spec) {
    spec.validate();
    const auto leaves = static_cast<std::uint64_t>(h.leaf_count());
    SynthGroundTruth out;
    auto& pc = out.cloud;
    pc.x.resize(spec.points);
    pc.y.resize(spec.points);
    pc.z.resize(spec.points);
    std::vector<std::int32_t> leaf_labels(spec.points);

    if (spec.geometry == SynthGeometry::uniform_box) {
        for (std::size_t i = 0; i < spec.points; ++i) {
            Rng geo = Rng::derive(spec.seed ^ kGeometrySalt, i);
            pc.x[i] = geo.next_in(0.0, spec.extent);
            pc.y[i] = geo.next_in(0.0, spec.extent);
            pc.z[i] = geo.next_in(0.0, spec.extent);
            Rng lab = Rng::derive(spec.seed ^ kLabelSalt, i);
            leaf_labels[i] = static_cast<std::int32_t>(lab.next_below(leaves));
        }
    } else {
        // One blob per (leaf, repeat); points are dealt round-robin so every
        // blob is populated and the layout depends only on (SynthSpec, seed).
        const std::uint64_t blob_count = leaves * spec.blobs_per_leaf;
        Rng centers(spec.seed ^ kGeometrySalt);
        std::vector<std::array<double, 3>> blob_center(blob_count);
        for (auto& c : blob_center)
            c = {centers.next_in(0.0, spec.extent), centers.next_in(0.0, spec.extent),
                 centers.next_in(0.0, spec.extent)};
        pc.instance.resize(spec.points);
        for (std::size_t i = 0; i < spec.points; ++i) {
            const std::uint64_t blob = i % blob_count;
            Rng geo = Rng::derive(spec.seed ^ kGeometrySalt, i);
            pc.x[i] = blob_center[blob][0] + spec.blob_sigma * geo.next_gaussian();
            pc.y[i] = blob_center[blob][1] + spec.blob_sigma * geo.next_gaussian();
            pc.z[i] = blob_center[blob][2] + spec.blob_sigma * geo.next_gaussian();
            pc.instance[i] = static_cast<std::int32_t>(blob);
            leaf_labels[i] = static_cast<std::int32_t>(blob / spec.blobs_per_leaf);
        }
    }

    // Label noise re-draws the leaf; the lift keeps every tuple consistent.
    if (spec.label_noise > 0.0) {
        for (std::size_t i = 0; i < spec.points; ++i) {
            Rng noise = Rng::derive(spec.seed ^ kLabelSalt, spec.points + i);
            if (noise.next_double() < spec.label_noise)
                leaf_labels[i] = static_cast<std::int32_t>(noise.next_below(leaves));
        }
    }

    out.labels = h.lift_leaf_labels(leaf_labels);
    pc.label_columns.assign(1, std::vector<std::int16_t>(spec.points));
    for (std::size_t i = 0; i < spec.points; ++i)
        pc.label_columns[0][i] = static_cast<std::int16_t>(leaf_labels[i]);
    return out;
}

LevelDistributions gen_predictions(const LabelHierarchy& h, const SynthSpec& spec,
                                   const LabelMatrix& ground_truth) {
    spec.validate();
    const auto depth = static_cast<std::size_t>(h.depth());
    if (ground_truth.levels != depth) fail("ground truth level count does not match hierarchy");
    std::vector<std::size_t> widths(depth);
    for (std::size_t lvl = 0; lvl < depth; ++lvl) widths[lvl] = h.level_size(static_cast<int>(lvl) + 1);

    LevelDistributions d(ground_truth.points, widths);
    for (std::size_t i = 0; i < ground_truth.points; ++i) {
        Rng rng = Rng::derive(spec.seed ^ kPredSalt, i);
        const bool corrupt = rng.next_double() < spec.inconsistency;
        const auto gt = ground_truth.row(i);
        for (std::size_t lvl = 0; lvl < depth; ++lvl) {
            auto target = static_cast<std::size_t>(gt[lvl]);
            if (target >= widths[lvl]) fail("ground truth label out of range at point " + std::to_string(i));
            if (corrupt) target = static_cast<std::size_t>(rng.next_below(widths[lvl]));
            auto row = d.row(lvl, i);
            const double base = 1.0 / (static_cast<double>(widths[lvl]) + spec.sharpness);
            for (auto& v : row) v = base;
            row[target] = (1.0 + spec.sharpness) / (static_cast<double>(widths[lvl]) + spec.sharpness);
        }
    }
    d.normalized = true;
    return d;
}

}  // namespace hiercloud
