#include <doctest.h>

#include "hiercloud/error.hpp"
#include "hiercloud/hierarchy.hpp"
#include "hiercloud/rng.hpp"
#include "oracles.hpp"

using namespace hiercloud;

namespace {

const char* kTwoLevel = R"(
levels 2
level 1: A,B
level 2: a1,a2,b1
edge 2:a1 -> 1:A
edge 2:a2 -> 1:A
edge 2:b1 -> 1:B
)";

LabelHierarchy campus3d() {
    return LabelHierarchy::parse_file(std::string(HIERCLOUD_DATA_DIR) + "/campus3d.hier");
}

}  // namespace

TEST_CASE("bundled campus3d config shape") {
    const auto h = campus3d();
    CHECK(h.depth() == 5);
    CHECK(h.level_size(1) == 3);
    CHECK(h.level_size(5) == 15);
    CHECK(h.leaf_count() == 15);
    CHECK(h.fc_paths().points == 15);
    CHECK(h.ignore_name() == "unclassified");
    for (int lvl = 1; lvl <= 5; ++lvl) CHECK(h.ignore_index(lvl).has_value());
}

TEST_CASE("single-level hierarchy") {
    const auto h = LabelHierarchy::parse("levels 1\nlevel 1: a,b\n");
    CHECK(h.depth() == 1);
    CHECK(h.fc_paths().points == 2);
    CHECK(h.fc_paths().levels == 1);
    CHECK(h.fc_paths().row(0)[0] == 0);
    CHECK(h.fc_paths().row(1)[0] == 1);
    // Empty chain condition: any label is consistent.
    const std::int32_t label[] = {1};
    CHECK(h.is_fully_consistent(label));
}

TEST_CASE("orphan class is a validation error naming the class") {
    const char* text = R"(
levels 3
level 1: A
level 2: x
level 3: y,z
edge 2:x -> 1:A
edge 3:y -> 2:x
)";
    CHECK_THROWS_WITH_AS(LabelHierarchy::parse(text),
                         doctest::Contains("'z'"), Error);
}

TEST_CASE("duplicate and multi-parent errors") {
    CHECK_THROWS_WITH_AS(LabelHierarchy::parse("levels 1\nlevel 1: a,a\n"),
                         doctest::Contains("duplicate class 'a'"), Error);
    const char* multi = R"(
levels 2
level 1: A,B
level 2: x
edge 2:x -> 1:A
edge 2:x -> 1:B
)";
    CHECK_THROWS_WITH_AS(LabelHierarchy::parse(multi), doctest::Contains("more than one parent"), Error);
    CHECK_THROWS_AS(LabelHierarchy::parse("levels 2\nlevel 1: A\nlevel 2: x\nedge 2:x -> 2:x\n"), Error);
}

TEST_CASE("non-ignore parent of ignore class rejected") {
    const char* text = R"(
levels 2
level 1: A,unclassified
level 2: unclassified
ignore unclassified
edge 2:unclassified -> 1:A
)";
    CHECK_THROWS_WITH_AS(LabelHierarchy::parse(text), doctest::Contains("non-ignore parent"), Error);
}

TEST_CASE("fc paths of small trees") {
    const auto h = LabelHierarchy::parse(kTwoLevel);
    REQUIRE(h.fc_paths().points == 3);
    CHECK(h.fc_paths().row(0)[0] == 0);  // (A, a1)
    CHECK(h.fc_paths().row(0)[1] == 0);
    CHECK(h.fc_paths().row(1)[0] == 0);  // (A, a2)
    CHECK(h.fc_paths().row(1)[1] == 1);
    CHECK(h.fc_paths().row(2)[0] == 1);  // (B, b1)
    CHECK(h.fc_paths().row(2)[1] == 2);
}

TEST_CASE("campus3d wall path passes building and construction") {
    const auto h = campus3d();
    const auto wall = h.find_class(5, "wall");
    REQUIRE(wall.has_value());
    const auto path = h.fc_paths().row(static_cast<std::size_t>(*wall));
    CHECK(h.class_name({4, path[3]}) == "building");
    CHECK(h.class_name({1, path[0]}) == "construction");
}

TEST_CASE("project walks to the unique ancestor") {
    const auto h = campus3d();
    const ClassRef wall{5, *h.find_class(5, "wall")};
    CHECK(h.class_name(h.project(wall, 4)) == "building");
    CHECK(h.class_name(h.project(wall, 1)) == "construction");
    CHECK(h.project(wall, 5) == wall);
    const ClassRef roof{5, *h.find_class(5, "roof")};
    CHECK(h.class_name(h.project(roof, 1)) == "construction");
    CHECK_THROWS_AS(h.project({2, 0}, 3), Error);
    CHECK_THROWS_AS(h.project({2, 0}, 0), Error);
}

TEST_CASE("project is transitive on random trees") {
    Rng rng(41);
    for (int trial = 0; trial < 25; ++trial) {
        const auto h = oracle::random_tree(rng);
        for (int reps = 0; reps < 20; ++reps) {
            const int level = 1 + static_cast<int>(rng.next_below(h.depth()));
            const ClassRef c{level, static_cast<int>(rng.next_below(h.level_size(level)))};
            const int g = 1 + static_cast<int>(rng.next_below(level));
            const int g2 = 1 + static_cast<int>(rng.next_below(g));
            CHECK(h.project(h.project(c, g), g2) == h.project(c, g2));
        }
    }
}

TEST_CASE("is_fully_consistent checks adjacent edges") {
    const auto h = campus3d();
    for (std::size_t leaf = 0; leaf < h.leaf_count(); ++leaf)
        CHECK(h.is_fully_consistent(h.fc_paths().row(leaf)));

    // ground at level 1 over the construction/building/roof chain.
    const HierLabel bad{*h.find_class(1, "ground"), *h.find_class(2, "construction"),
                        *h.find_class(3, "construction"), *h.find_class(4, "building"),
                        *h.find_class(5, "roof")};
    CHECK_FALSE(h.is_fully_consistent(bad));
}

TEST_CASE("lift_leaf_labels produces the unique FC path") {
    const auto h = campus3d();
    const std::int32_t roof = *h.find_class(5, "roof");
    const std::int32_t unk = *h.find_class(5, "unclassified");
    const std::vector<std::int32_t> leaves{roof, unk};
    const auto lifted = h.lift_leaf_labels(leaves);
    REQUIRE(lifted.points == 2);
    CHECK(h.class_name({1, lifted.row(0)[0]}) == "construction");
    CHECK(h.class_name({2, lifted.row(0)[1]}) == "construction");
    CHECK(h.class_name({3, lifted.row(0)[2]}) == "construction");
    CHECK(h.class_name({4, lifted.row(0)[3]}) == "building");
    CHECK(h.class_name({5, lifted.row(0)[4]}) == "roof");
    for (int lvl = 1; lvl <= 5; ++lvl) CHECK(h.class_name({lvl, lifted.row(1)[lvl - 1]}) == "unclassified");

    CHECK(h.lift_leaf_labels({}).points == 0);
    const std::vector<std::int32_t> bad{99};
    CHECK_THROWS_WITH_AS(h.lift_leaf_labels(bad), doctest::Contains("point 0"), Error);
}

TEST_CASE("lift then take leaf level is the identity; all paths consistent") {
    Rng rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        const auto h = oracle::random_tree(rng);
        CHECK(h.fc_paths().points == h.leaf_count());
        for (std::size_t leaf = 0; leaf < h.leaf_count(); ++leaf)
            CHECK(h.is_fully_consistent(h.fc_paths().row(leaf)));

        std::vector<std::int32_t> leaves(40);
        for (auto& v : leaves) v = static_cast<std::int32_t>(rng.next_below(h.leaf_count()));
        const auto lifted = h.lift_leaf_labels(leaves);
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            CHECK(lifted.row(i)[h.depth() - 1] == leaves[i]);
            CHECK(h.is_fully_consistent(lifted.row(i)));
        }
    }
}

TEST_CASE("serialize round trip") {
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const auto h = oracle::random_tree(rng);
        CHECK(LabelHierarchy::parse(h.serialize()) == h);
    }
    const auto h = campus3d();
    CHECK(LabelHierarchy::parse(h.serialize()) == h);
}

TEST_CASE("parse errors carry line numbers") {
    CHECK_THROWS_WITH_AS(LabelHierarchy::parse("levels 1\nlevel 1: a\nnonsense\n"),
                         doctest::Contains("line 3"), Error);
    CHECK_THROWS_WITH_AS(LabelHierarchy::parse("levels 1\nlevels 1\nlevel 1: a\n"),
                         doctest::Contains("duplicate 'levels'"), Error);
    CHECK_THROWS_AS(LabelHierarchy::parse(""), Error);
    CHECK_THROWS_AS(LabelHierarchy::parse("levels 2\nlevel 1: a\n"), Error);
}
