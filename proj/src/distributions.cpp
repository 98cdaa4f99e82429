#include "hiercloud/distributions.hpp"

#include <string>

#include "hiercloud/error.hpp"

namespace hiercloud {

void LevelDistributions::validate_shape(const LabelHierarchy& h) const {
    if (depth() != static_cast<std::size_t>(h.depth()))
        fail("distributions have " + std::to_string(depth()) + " levels, hierarchy has " +
             std::to_string(h.depth()));
    for (std::size_t lvl = 0; lvl < depth(); ++lvl) {
        if (widths[lvl] != h.level_size(static_cast<int>(lvl) + 1))
            fail("level " + std::to_string(lvl + 1) + " width " + std::to_string(widths[lvl]) +
                 " does not match hierarchy class count " +
                 std::to_string(h.level_size(static_cast<int>(lvl) + 1)));
        if (levels[lvl].size() != points * widths[lvl])
            fail("level " + std::to_string(lvl + 1) + " payload size mismatch");
        for (std::size_t i = 0; i < points; ++i)
            for (double v : row(lvl, i))
                if (!std::isfinite(v) || v < 0.0)
                    fail("non-finite or negative probability at level " + std::to_string(lvl + 1) +
                         ", point " + std::to_string(i));
    }
}

void LevelDistributions::validate(const LabelHierarchy& h) const {
    validate_shape(h);
    if (!normalized) return;
    for (std::size_t lvl = 0; lvl < depth(); ++lvl) {
        for (std::size_t i = 0; i < points; ++i) {
            double sum = 0.0;
            for (double v : row(lvl, i)) sum += v;
            if (std::abs(sum - 1.0) > 1e-6)
                fail("row sum " + std::to_string(sum) + " at level " + std::to_string(lvl + 1) +
                     ", point " + std::to_string(i) + " is not 1");
        }
    }
}

void LevelDistributions::normalize_rows() {
    for (std::size_t lvl = 0; lvl < depth(); ++lvl) {
        for (std::size_t i = 0; i < points; ++i) {
            auto r = row(lvl, i);
            double sum = 0.0;
            for (double v : r) sum += v;
            if (sum <= 0.0)
                fail("cannot normalize all-zero row at level " + std::to_string(lvl + 1) + ", point " +
                     std::to_string(i));
            for (double& v : r) v /= sum;
        }
    }
    normalized = true;
}

}  // namespace hiercloud
