#include <catch2/catch_amalgamated.hpp>

#include "mkcf/box.hpp"
#include "support/test_util.hpp"

using mkcf::Box;

TEST_CASE("overlap identity, disjoint, and partial") {
    const Box a(0, 0, 10, 10);
    CHECK(mkcf::overlap(a, a) == 1.0);
    CHECK(mkcf::overlap(a, Box(100, 100, 5, 5)) == 0.0);
    // intersection 5x10 = 50, union 100 + 100 - 50 = 150
    CHECK_THAT(mkcf::overlap(a, Box(5, 0, 10, 10)), Catch::Matchers::WithinAbs(50.0 / 150.0, 1e-12));
}

TEST_CASE("overlap is symmetric, bounded, translation invariant") {
    auto g = testutil::rng(7);
    for (int n = 0; n < 500; ++n) {
        const Box a = testutil::random_box(g);
        const Box b = testutil::random_box(g);
        const double ab = mkcf::overlap(a, b);
        CHECK(ab == mkcf::overlap(b, a));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(mkcf::overlap(a, a) == 1.0);
        const int dx = static_cast<int>(g() % 41) - 20;
        const int dy = static_cast<int>(g() % 41) - 20;
        CHECK(mkcf::overlap(a.translated(dx, dy), b.translated(dx, dy)) == ab);
    }
}

TEST_CASE("area") {
    CHECK(Box(0, 0, 1, 1).area() == 1);
    CHECK(Box(3, 7, 10, 20).area() == 200);
    CHECK(Box(0, 0, 800, 600).area() == 480000);
}

TEST_CASE("centroid") {
    CHECK(Box(0, 0, 10, 10).centroid().x == 5.0);
    CHECK(Box(0, 0, 10, 10).centroid().y == 5.0);
    CHECK(Box(2, 4, 4, 8).centroid().x == 4.0);
    CHECK(Box(2, 4, 4, 8).centroid().y == 8.0);
    CHECK(Box(0, 0, 1, 1).centroid().x == 0.5);
    CHECK(Box(0, 0, 1, 1).centroid().y == 0.5);
}

TEST_CASE("degenerate boxes are rejected") {
    CHECK_THROWS_AS(Box(0, 0, 0, 5), std::invalid_argument);
    CHECK_THROWS_AS(Box(0, 0, 5, -1), std::invalid_argument);
}

TEST_CASE("union_box covers both operands") {
    const Box u = mkcf::union_box(Box(0, 0, 4, 4), Box(10, 2, 4, 8));
    CHECK(u == Box(0, 0, 14, 10));
}
