#include "hiercloud/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "hiercloud/error.hpp"

namespace hiercloud {

void SampleSpec::validate() const {
    if (voxel_size <= 0.0) fail("voxel size must be positive");
    if (block_l <= 0.0 || block_w <= 0.0) fail("block dimensions must be positive");
    if (sample_size < 1) fail("sample size must be at least 1");
}

namespace {

struct VoxelKey {
    std::int64_t x, y, z;
    friend bool operator==(const VoxelKey&, const VoxelKey&) = default;
};

struct VoxelKeyHash {
    std::size_t operator()(const VoxelKey& k) const noexcept {
        auto mix = [](std::uint64_t v) {
            v = (v ^ (v >> 30)) * 0xBF58476D1CE4E5B9ULL;
            v = (v ^ (v >> 27)) * 0x94D049BB133111EBULL;
            return v ^ (v >> 31);
        };
        std::uint64_t h = mix(static_cast<std::uint64_t>(k.x));
        h = mix(h ^ static_cast<std::uint64_t>(k.y));
        h = mix(h ^ static_cast<std::uint64_t>(k.z));
        return static_cast<std::size_t>(h);
    }
};

VoxelKey voxel_key(const PointCloud& pc, std::size_t i, double size) {
    return {static_cast<std::int64_t>(std::floor(pc.x[i] / size)),
            static_cast<std::int64_t>(std::floor(pc.y[i] / size)),
            static_cast<std::int64_t>(std::floor(pc.z[i] / size))};
}

}  // namespace

std::vector<std::size_t> voxel_downsample(const PointCloud& pc, double voxel_size) {
    if (voxel_size <= 0.0) fail("voxel size must be positive");
    if (pc.size() == 0) fail("voxel downsample of an empty cloud");

    struct Cell {
        double sx = 0, sy = 0, sz = 0;
        std::int64_t count = 0;
        double best_d2 = 0;
        std::size_t best = 0;
        bool chosen = false;
    };
    std::unordered_map<VoxelKey, Cell, VoxelKeyHash> cells;
    cells.reserve(pc.size() / 2);

    for (std::size_t i = 0; i < pc.size(); ++i) {
        Cell& c = cells[voxel_key(pc, i, voxel_size)];
        c.sx += pc.x[i];
        c.sy += pc.y[i];
        c.sz += pc.z[i];
        ++c.count;
    }
    // Representative = member nearest the cell centroid, ties to the
    // smallest index; the second pass visits points in index order so a
    // strict improvement test implements the tie rule.
    for (std::size_t i = 0; i < pc.size(); ++i) {
        Cell& c = cells[voxel_key(pc, i, voxel_size)];
        const double inv_count = 1.0 / static_cast<double>(c.count);
        const double dx = pc.x[i] - c.sx * inv_count;
        const double dy = pc.y[i] - c.sy * inv_count;
        const double dz = pc.z[i] - c.sz * inv_count;
        const double d2 = dx * dx + dy * dy + dz * dz;
        if (!c.chosen || d2 < c.best_d2) {
            c.chosen = true;
            c.best_d2 = d2;
            c.best = i;
        }
    }
    std::vector<std::size_t> out;
    out.reserve(cells.size());
    for (const auto& [key, cell] : cells) out.push_back(cell.best);
    std::sort(out.begin(), out.end());
    return out;
}

BlockSample rbs_at(const PointCloud& pc, std::size_t center, double l, double w, std::size_t n,
                   Rng& rng) {
    if (pc.size() == 0) fail("block sample of an empty cloud");
    if (center >= pc.size()) fail("block center index out of range");
    if (n < 1) fail("sample size must be at least 1");
    const double cx = pc.x[center];
    const double cy = pc.y[center];
    const double half_l = l / 2.0;
    const double half_w = w / 2.0;

    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < pc.size(); ++i)
        if (std::abs(pc.x[i] - cx) <= half_l && std::abs(pc.y[i] - cy) <= half_w)
            members.push_back(i);

    BlockSample out;
    out.center = center;
    out.indices.reserve(n);
    out.indices.push_back(center);

    std::vector<std::size_t> pool;
    pool.reserve(members.size());
    for (auto i : members)
        if (i != center) pool.push_back(i);

    while (out.indices.size() < n && !pool.empty()) {
        const auto j = static_cast<std::size_t>(rng.next_below(pool.size()));
        out.indices.push_back(pool[j]);
        pool[j] = pool.back();
        pool.pop_back();
    }
    if (out.indices.size() < n) {
        out.padded = true;
        while (out.indices.size() < n)
            out.indices.push_back(members[rng.next_below(members.size())]);
    }
    return out;
}

BlockSample rbs(const PointCloud& pc, double l, double w, std::size_t n, std::uint64_t seed) {
    if (pc.size() == 0) fail("block sample of an empty cloud");
    Rng rng(seed);
    const auto center = static_cast<std::size_t>(rng.next_below(pc.size()));
    return rbs_at(pc, center, l, w, n, rng);
}

KdTree3::KdTree3(const PointCloud& pc) : xs_(pc.x), ys_(pc.y), zs_(pc.z) {
    order_.resize(pc.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    // Median split, axes cycled; built iteratively over an explicit stack.
    struct Range {
        std::size_t lo, hi;
        int axis;
    };
    std::vector<Range> stack{{0, order_.size(), 0}};
    const double* coords[3] = {xs_.data(), ys_.data(), zs_.data()};
    while (!stack.empty()) {
        auto [lo, hi, axis] = stack.back();
        stack.pop_back();
        if (hi - lo <= 1) continue;
        const std::size_t mid = (lo + hi) / 2;
        const double* c = coords[axis];
        std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                         [c](std::size_t a, std::size_t b) { return c[a] < c[b]; });
        stack.push_back({lo, mid, (axis + 1) % 3});
        stack.push_back({mid + 1, hi, (axis + 1) % 3});
    }
}

void KdTree3::search(std::size_t lo, std::size_t hi, int axis, const double* q, std::size_t k,
                     std::vector<std::pair<double, std::size_t>>& heap) const {
    if (hi <= lo) return;
    const std::size_t mid = (lo + hi) / 2;
    const std::size_t idx = order_[mid];
    const double dx = xs_[idx] - q[0];
    const double dy = ys_[idx] - q[1];
    const double dz = zs_[idx] - q[2];
    const std::pair<double, std::size_t> cand{dx * dx + dy * dy + dz * dz, idx};
    if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
    } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
    }

    const double axis_coord = axis == 0 ? xs_[idx] : axis == 1 ? ys_[idx] : zs_[idx];
    const double delta = q[axis] - axis_coord;
    const std::size_t near_lo = delta <= 0 ? lo : mid + 1;
    const std::size_t near_hi = delta <= 0 ? mid : hi;
    const std::size_t far_lo = delta <= 0 ? mid + 1 : lo;
    const std::size_t far_hi = delta <= 0 ? hi : mid;
    const int next = (axis + 1) % 3;

    search(near_lo, near_hi, next, q, k, heap);
    // An equal plane distance can still hide an equal-distance point with a
    // smaller index, so only a strictly larger bound prunes.
    if (heap.size() < k || delta * delta <= heap.front().first) search(far_lo, far_hi, next, q, k, heap);
}

std::vector<std::size_t> KdTree3::knn(double qx, double qy, double qz, std::size_t k) const {
    if (k > order_.size()) fail("knn: k exceeds cloud size");
    std::vector<std::pair<double, std::size_t>> heap;
    heap.reserve(k + 1);
    const double q[3] = {qx, qy, qz};
    search(0, order_.size(), 0, q, k, heap);
    std::sort(heap.begin(), heap.end());
    std::vector<std::size_t> out;
    out.reserve(heap.size());
    for (const auto& [d2, idx] : heap) out.push_back(idx);
    return out;
}

std::vector<std::size_t> rc_knn_at(const PointCloud& pc, std::size_t center, std::size_t k) {
    if (center >= pc.size()) fail("knn center index out of range");
    if (k > pc.size()) fail("knn: k exceeds cloud size");
    KdTree3 tree(pc);
    return tree.knn(pc.x[center], pc.y[center], pc.z[center], k);
}

std::vector<std::size_t> rc_knn(const PointCloud& pc, std::size_t k, std::uint64_t seed) {
    if (pc.size() == 0) fail("knn sample of an empty cloud");
    Rng rng(seed);
    return rc_knn_at(pc, static_cast<std::size_t>(rng.next_below(pc.size())), k);
}

}  // namespace hiercloud
