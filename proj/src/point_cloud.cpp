#include "hiercloud/point_cloud.hpp"

#include <cmath>
#include <string>

#include "hiercloud/error.hpp"

namespace hiercloud {

void PointCloud::validate() const {
    const std::size_t n = size();
    if (y.size() != n || z.size() != n) fail("coordinate columns have different lengths");
    if (has_color() && (r.size() != n || g.size() != n || b.size() != n))
        fail("color columns have different lengths");
    for (const auto& col : label_columns)
        if (col.size() != n) fail("label column length does not match point count");
    if (has_instances() && instance.size() != n) fail("instance column length does not match point count");
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]) || !std::isfinite(z[i]))
            fail("non-finite coordinate at point " + std::to_string(i));
}

PointCloud PointCloud::subset(std::span<const std::size_t> indices) const {
    PointCloud out;
    out.x.reserve(indices.size());
    out.y.reserve(indices.size());
    out.z.reserve(indices.size());
    out.label_columns.resize(label_columns.size());
    for (auto i : indices) {
        if (i >= size()) fail("subset index " + std::to_string(i) + " out of range");
        out.x.push_back(x[i]);
        out.y.push_back(y[i]);
        out.z.push_back(z[i]);
        if (has_color()) {
            out.r.push_back(r[i]);
            out.g.push_back(g[i]);
            out.b.push_back(b[i]);
        }
        for (std::size_t c = 0; c < label_columns.size(); ++c)
            out.label_columns[c].push_back(label_columns[c][i]);
        if (has_instances()) out.instance.push_back(instance[i]);
    }
    return out;
}

}  // namespace hiercloud
