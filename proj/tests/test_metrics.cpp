#include <doctest.h>

#include <algorithm>

#include "hiercloud/error.hpp"
#include "hiercloud/metrics.hpp"
#include "hiercloud/rng.hpp"
#include "oracles.hpp"

using namespace hiercloud;

namespace {

LabelHierarchy campus3d() {
    return LabelHierarchy::parse_file(std::string(HIERCLOUD_DATA_DIR) + "/campus3d.hier");
}

// Two levels with an ignore chain; small enough to evaluate by hand.
//   L1: unclassified(0), ground(1), construction(2)
//   L2: unclassified(0), natural(1), paved(2), building(3)
LabelHierarchy fixture_tree() {
    return LabelHierarchy::parse(R"(
levels 2
level 1: unclassified,ground,construction
level 2: unclassified,natural,paved,building
ignore unclassified
edge 2:unclassified -> 1:unclassified
edge 2:natural -> 1:ground
edge 2:paved -> 1:ground
edge 2:building -> 1:construction
)");
}

// The 12-point fixture: (gt1, pred1, gt2, pred2) per point. Expected
// values below were enumerated by hand from these rows.
struct FixturePoint {
    std::int32_t gt1, pred1, gt2, pred2;
};
constexpr FixturePoint kFixture[12] = {
    {1, 1, 1, 1},  // correct ground/natural
    {1, 1, 1, 2},  // level-2 miss (natural -> paved)
    {1, 2, 1, 1},  // level-1 miss
    {1, 1, 2, 2},  // correct ground/paved
    {1, 1, 2, 1},  // level-2 miss (paved -> natural)
    {2, 2, 3, 3},  // correct construction/building
    {2, 2, 3, 3},
    {2, 1, 3, 1},  // both levels wrong
    {2, 2, 3, 3},
    {0, 1, 0, 1},  // ignore-class ground truth: excluded everywhere
    {1, 1, 1, 0},  // predicted as the ignore class: counts as an error
    {2, 2, 3, 2},  // level-2 miss (building -> paved)
};

LevelConfusion fixture_confusion(int level) {
    const auto h = fixture_tree();
    LevelConfusion conf(level, h.level_size(level), h.ignore_index(level));
    for (const auto& p : kFixture)
        conf.add(level == 1 ? p.gt1 : p.gt2, level == 1 ? p.pred1 : p.pred2);
    return conf;
}

}  // namespace

TEST_CASE("CP of an FC label is 1; H=1 labels are trivially consistent") {
    const auto h = campus3d();
    for (std::size_t leaf = 0; leaf < h.leaf_count(); ++leaf) {
        const auto cp = consistency_proportion(h, h.fc_paths().row(leaf));
        CHECK(cp.matched == 5);
        CHECK(cp.value() == 1.0);
    }
    const auto flat = LabelHierarchy::parse("levels 1\nlevel 1: a,b,c\n");
    const std::int32_t label[] = {2};
    CHECK(consistency_proportion(flat, label).value() == 1.0);
}

TEST_CASE("CP of the mixed campus3d label is 4/5") {
    const auto h = campus3d();
    const HierLabel label{*h.find_class(1, "ground"), *h.find_class(2, "construction"),
                          *h.find_class(3, "construction"), *h.find_class(4, "building"),
                          *h.find_class(5, "roof")};
    const auto cp = consistency_proportion(h, label);
    CHECK(cp.matched == 4);
    CHECK(cp.levels == 5);
    CHECK(cp.matched == oracle::cp_brute_force(h, label));
}

TEST_CASE("CP equals path enumeration on random trees and labels") {
    Rng rng(101);
    for (int trial = 0; trial < 40; ++trial) {
        const auto h = oracle::random_tree(rng);
        const auto labels = oracle::random_labels(h, 50, rng);
        for (std::size_t i = 0; i < labels.points; ++i) {
            const auto row = labels.row(i);
            const auto cp = consistency_proportion(h, row);
            CHECK(cp.matched == oracle::cp_brute_force(h, row));
            CHECK((cp.matched == h.depth()) == h.is_fully_consistent(row));
        }
    }
}

TEST_CASE("consistency rate thresholds") {
    const auto h = campus3d();
    LabelMatrix labels(3, 5);
    const HierLabel mixed{*h.find_class(1, "ground"), *h.find_class(2, "construction"),
                          *h.find_class(3, "construction"), *h.find_class(4, "building"),
                          *h.find_class(5, "roof")};
    const auto roof_path = h.fc_paths().row(static_cast<std::size_t>(*h.find_class(5, "roof")));
    const auto wall_path = h.fc_paths().row(static_cast<std::size_t>(*h.find_class(5, "wall")));
    std::copy(roof_path.begin(), roof_path.end(), labels.row(0).begin());
    std::copy(mixed.begin(), mixed.end(), labels.row(1).begin());
    std::copy(wall_path.begin(), wall_path.end(), labels.row(2).begin());

    CHECK(consistency_rate(h, labels, 1.0) == doctest::Approx(2.0 / 3.0));
    CHECK(consistency_rate(h, labels, 0.0) == 1.0);
    CHECK(consistency_rate(h, labels, 0.8) == 1.0);  // 4/5 meets 0.8

    CHECK_THROWS_AS(consistency_rate(h, LabelMatrix(0, 5), 1.0), Error);
}

TEST_CASE("CR is non-increasing in alpha and accumulators merge") {
    Rng rng(17);
    const auto h = campus3d();
    const auto labels = oracle::random_labels(h, 400, rng);
    ConsistencyAccumulator whole(h.depth());
    whole.accumulate(h, labels);
    double prev = 2.0;
    for (double alpha : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
        const double cr = whole.consistency_rate(alpha);
        CHECK(cr <= prev);
        prev = cr;
    }
    CHECK(whole.consistency_rate(0.0) == 1.0);

    // Chunked accumulation merges to the same histogram.
    ConsistencyAccumulator left(h.depth()), right(h.depth());
    for (std::size_t i = 0; i < labels.points; ++i)
        (i < 200 ? left : right).add(consistency_proportion(h, labels.row(i)));
    left.merge(right);
    CHECK(left.histogram() == whole.histogram());
}

TEST_CASE("consistency_stats carries per-point values, histogram and CR") {
    Rng rng(19);
    const auto h = campus3d();
    const auto labels = oracle::random_labels(h, 150, rng);
    const std::vector<double> alphas{0.0, 0.4, 0.8, 1.0};
    const auto stats = consistency_stats(h, labels, alphas);
    REQUIRE(stats.per_point.size() == 150);
    REQUIRE(stats.histogram.size() == 6);
    std::int64_t total = 0;
    for (std::size_t k = 0; k < stats.histogram.size(); ++k) total += stats.histogram[k];
    CHECK(total == 150);
    for (std::size_t i = 0; i < stats.per_point.size(); ++i)
        CHECK(stats.histogram[stats.per_point[i].matched] > 0);
    REQUIRE(stats.cr.size() == alphas.size());
    CHECK(stats.cr[0] == 1.0);
    for (std::size_t a = 0; a < alphas.size(); ++a)
        CHECK(stats.cr[a] == consistency_rate(h, labels, alphas[a]));
}

TEST_CASE("overall accuracy basics") {
    const auto flat = LabelHierarchy::parse("levels 1\nlevel 1: a,b\n");
    LevelConfusion conf(1, 2, std::nullopt);
    conf.accumulate(std::vector<std::int32_t>{0, 0, 1}, std::vector<std::int32_t>{0, 1, 1});
    CHECK(overall_accuracy(conf) == doctest::Approx(2.0 / 3.0));

    LevelConfusion perfect(1, 2, std::nullopt);
    perfect.accumulate(std::vector<std::int32_t>{0, 1, 1}, std::vector<std::int32_t>{0, 1, 1});
    CHECK(overall_accuracy(perfect) == 1.0);

    LevelConfusion empty(1, 2, 0);
    empty.add(0, 1);
    CHECK(empty.ignored() == 1);
    CHECK_THROWS_AS(overall_accuracy(empty), Error);
}

TEST_CASE("per-class IoU matches the intersection example") {
    // pred set {p1,p2} vs gt set {p2,p3}: IoU 1/3.
    const std::vector<std::int32_t> gt{1, 0, 0};
    const std::vector<std::int32_t> pred{0, 0, 1};
    LevelConfusion conf(1, 2, std::nullopt);
    conf.accumulate(gt, pred);
    const auto ious = per_class_iou(conf);
    REQUIRE(ious[0].has_value());
    CHECK(*ious[0] == doctest::Approx(1.0 / 3.0));

    LevelConfusion perfect(1, 3, std::nullopt);
    perfect.accumulate(std::vector<std::int32_t>{0, 1, 2}, std::vector<std::int32_t>{0, 1, 2});
    for (const auto& iou : per_class_iou(perfect)) {
        REQUIRE(iou.has_value());
        CHECK(*iou == 1.0);
    }
}

TEST_CASE("OA and IoU equal the per-point set oracles on random data") {
    Rng rng(23);
    const std::size_t classes = 6;
    for (int trial = 0; trial < 10; ++trial) {
        const bool with_ignore = trial % 2 == 0;
        const std::optional<int> ignore = with_ignore ? std::optional<int>(0) : std::nullopt;
        std::vector<std::int32_t> gt(500), pred(500);
        for (auto& v : gt) v = static_cast<std::int32_t>(rng.next_below(classes));
        for (auto& v : pred) v = static_cast<std::int32_t>(rng.next_below(classes));
        LevelConfusion conf(1, classes, ignore);
        conf.accumulate(gt, pred);
        CHECK(overall_accuracy(conf) == doctest::Approx(oracle::oa_point_loop(gt, pred, ignore)));
        const auto ious = per_class_iou(conf);
        const auto expected = oracle::iou_sets(gt, pred, classes, ignore);
        REQUIRE(ious.size() == expected.size());
        for (std::size_t c = 0; c < classes; ++c) {
            CHECK(ious[c].has_value() == expected[c].has_value());
            if (ious[c]) CHECK(*ious[c] == doctest::Approx(*expected[c]));
        }
    }
}

TEST_CASE("undefined classes are excluded from the mean") {
    // Class 2 appears in neither ground truth nor prediction.
    LevelConfusion conf(1, 3, std::nullopt);
    conf.accumulate(std::vector<std::int32_t>{0, 0, 1}, std::vector<std::int32_t>{0, 1, 1});
    const auto ious = per_class_iou(conf);
    CHECK(ious[0].has_value());
    CHECK(ious[1].has_value());
    CHECK_FALSE(ious[2].has_value());
    // {1/2, 1/2} -> mean 1/2; the undefined class contributes nothing.
    CHECK(mean_iou(conf) == doctest::Approx(0.5));

    LevelConfusion nothing(1, 2, 0);
    nothing.add(0, 0);
    CHECK_THROWS_AS(mean_iou(nothing), Error);
}

TEST_CASE("mean IoU of per-class IoUs {1/3, 1} is 2/3") {
    // Class 2 is the ignore class, so the two mispredictions into it cost
    // class 0 recall without defining a third class.
    LevelConfusion conf(1, 3, 2);
    conf.accumulate(std::vector<std::int32_t>{0, 0, 0, 1}, std::vector<std::int32_t>{0, 2, 2, 1});
    const auto ious = per_class_iou(conf);
    REQUIRE(ious[0].has_value());
    REQUIRE(ious[1].has_value());
    CHECK(*ious[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(*ious[1] == 1.0);
    CHECK(mean_iou(conf) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    // A single defined class: the mean is that class's IoU.
    LevelConfusion solo(1, 2, 1);
    solo.accumulate(std::vector<std::int32_t>{0, 0, 0}, std::vector<std::int32_t>{0, 0, 1});
    CHECK(mean_iou(solo) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("12-point fixture reproduces the hand-computed metrics") {
    const auto conf1 = fixture_confusion(1);
    CHECK(conf1.ignored() == 1);
    CHECK(overall_accuracy(conf1) == doctest::Approx(9.0 / 11.0).epsilon(1e-12));
    const auto iou1 = per_class_iou(conf1);
    CHECK_FALSE(iou1[0].has_value());
    CHECK(*iou1[1] == doctest::Approx(5.0 / 7.0).epsilon(1e-12));
    CHECK(*iou1[2] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(mean_iou(conf1) == doctest::Approx(29.0 / 42.0).epsilon(1e-12));

    const auto conf2 = fixture_confusion(2);
    CHECK(conf2.ignored() == 1);
    CHECK(overall_accuracy(conf2) == doctest::Approx(6.0 / 11.0).epsilon(1e-12));
    const auto iou2 = per_class_iou(conf2);
    CHECK_FALSE(iou2[0].has_value());
    CHECK(*iou2[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(*iou2[2] == doctest::Approx(1.0 / 4.0).epsilon(1e-12));
    CHECK(*iou2[3] == doctest::Approx(3.0 / 5.0).epsilon(1e-12));
    CHECK(mean_iou(conf2) == doctest::Approx(71.0 / 180.0).epsilon(1e-12));
}

TEST_CASE("weighted coverage") {
    // gt sizes {3,1}; best IoUs {0.5, 0} -> 0.375.
    InstanceSet gt{{0, 0, 0, 1, -1, -1}};
    InstanceSet pred{{2, 2, -1, -1, 2, -1}};
    CHECK(wcov(gt, pred) == doctest::Approx(0.375).epsilon(1e-12));

    CHECK(wcov(gt, gt) == 1.0);

    InstanceSet single_gt{{0, 0, -1, -1}};
    InstanceSet disjoint{{-1, -1, 4, 4}};
    CHECK(wcov(single_gt, disjoint) == 0.0);

    InstanceSet no_instances{{-1, -1, -1, -1, -1, -1}};
    CHECK_THROWS_AS(wcov(no_instances, pred), Error);
    CHECK(wcov(gt, no_instances) == 0.0);  // empty prediction set
}

TEST_CASE("wcov bounds, relabeling and permutation invariance") {
    Rng rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 60;
        InstanceSet gt, pred;
        gt.ids.resize(n);
        pred.ids.resize(n);
        for (auto& v : gt.ids) v = static_cast<std::int32_t>(rng.next_below(5)) - 1;
        for (auto& v : pred.ids) v = static_cast<std::int32_t>(rng.next_below(5)) - 1;
        bool any = false;
        for (auto v : gt.ids) any |= v >= 0;
        if (!any) gt.ids[0] = 0;

        const double base = wcov(gt, pred);
        CHECK(base >= 0.0);
        CHECK(base <= 1.0);

        // Relabel ids with an affine map (order-breaking).
        InstanceSet gt2 = gt, pred2 = pred;
        for (auto& v : gt2.ids)
            if (v >= 0) v = 1000 - 7 * v;
        for (auto& v : pred2.ids)
            if (v >= 0) v = 50 + 3 * v;
        CHECK(wcov(gt2, pred2) == doctest::Approx(base).epsilon(1e-12));

        // Permute the points.
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.next_below(i)]);
        InstanceSet gt3, pred3;
        gt3.ids.resize(n);
        pred3.ids.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            gt3.ids[i] = gt.ids[perm[i]];
            pred3.ids[i] = pred.ids[perm[i]];
        }
        CHECK(wcov(gt3, pred3) == base);
    }
}

TEST_CASE("metrics are invariant under point permutation") {
    Rng rng(53);
    const auto h = campus3d();
    const auto labels = oracle::random_labels(h, 200, rng);
    std::vector<std::int32_t> gt(200), pred(200);
    for (auto& v : gt) v = static_cast<std::int32_t>(rng.next_below(h.level_size(1)));
    for (auto& v : pred) v = static_cast<std::int32_t>(rng.next_below(h.level_size(1)));

    std::vector<std::size_t> perm(200);
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.next_below(i)]);

    LevelConfusion a(1, h.level_size(1), h.ignore_index(1));
    LevelConfusion b(1, h.level_size(1), h.ignore_index(1));
    a.accumulate(gt, pred);
    LabelMatrix shuffled(labels.points, labels.levels);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        b.add(gt[perm[i]], pred[perm[i]]);
        const auto src = labels.row(perm[i]);
        std::copy(src.begin(), src.end(), shuffled.row(i).begin());
    }
    CHECK(overall_accuracy(a) == overall_accuracy(b));
    CHECK(mean_iou(a) == mean_iou(b));
    CHECK(consistency_rate(h, labels, 0.6) == consistency_rate(h, shuffled, 0.6));
}
