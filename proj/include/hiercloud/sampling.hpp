#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hiercloud/point_cloud.hpp"
#include "hiercloud/rng.hpp"

namespace hiercloud {

enum class SampleMethod { voxel, rbs, rc_knn };

struct SampleSpec {
    SampleMethod method = SampleMethod::rbs;
    double voxel_size = 0.15;
    double block_l = 12.0;
    double block_w = 12.0;
    std::size_t sample_size = 2048;
    std::uint64_t seed = 0;

    void validate() const;  // positive sizes, sample_size >= 1
};

// Keeps one point per occupied cell of the axis-aligned voxel lattice
// (cell key = floor(coord / voxel_size) per axis): the member nearest the
// cell's point centroid, ties to the smallest index. Indices ascending.
std::vector<std::size_t> voxel_downsample(const PointCloud& pc, double voxel_size);

struct BlockSample {
    std::vector<std::size_t> indices;  // center first
    std::size_t center = 0;
    bool padded = false;  // block held fewer than n points; resampled with replacement
};

// Random block sampling: a uniformly chosen center point plus n-1 draws
// from the l x w block around it (|x - xc| <= l/2, |y - yc| <= w/2; z is
// unconstrained). Draws are without replacement until the block is
// exhausted, then with replacement (padded flag set).
BlockSample rbs(const PointCloud& pc, double l, double w, std::size_t n, std::uint64_t seed);
BlockSample rbs_at(const PointCloud& pc, std::size_t center, double l, double w, std::size_t n,
                   Rng& rng);

// Exact kd-tree over the cloud coordinates; ranking is by (squared
// Euclidean distance, index) so equal-distance results always resolve to
// the smaller index.
class KdTree3 {
public:
    explicit KdTree3(const PointCloud& pc);

    // The k nearest points to (qx, qy, qz), ascending by (distance, index).
    std::vector<std::size_t> knn(double qx, double qy, double qz, std::size_t k) const;

private:
    void search(std::size_t lo, std::size_t hi, int axis, const double* q, std::size_t k,
                std::vector<std::pair<double, std::size_t>>& heap) const;

    std::vector<double> xs_, ys_, zs_;
    std::vector<std::size_t> order_;
};

// Random-centered k nearest neighbors: k points closest to a uniformly
// chosen center (the center itself is at distance 0). Throws when
// k exceeds the cloud size.
std::vector<std::size_t> rc_knn(const PointCloud& pc, std::size_t k, std::uint64_t seed);
std::vector<std::size_t> rc_knn_at(const PointCloud& pc, std::size_t center, std::size_t k);

}  // namespace hiercloud
