#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mrl/convex_hull.hpp"
#include "mrl/solver.hpp"

using namespace mrl;

TEST_CASE("hull of a cube with interior points is exactly the 8 corners") {
    std::vector<Vec3> pts;
    for (const double x : {-1.0, 1.0})
        for (const double y : {-1.0, 1.0})
            for (const double z : {-1.0, 1.0}) pts.push_back({x, y, z});
    Rng rng(17);
    for (int i = 0; i < 100; ++i)
        pts.push_back({rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9)});

    const auto verts = convex_hull_vertices(pts);
    REQUIRE(verts.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) CHECK(verts[i] == i);
}

TEST_CASE("all points of a sphere shell are hull vertices") {
    std::vector<Vec3> pts;
    const int n = 200;
    for (int k = 0; k < n; ++k) {
        // Fibonacci sphere: deterministic, well spread.
        const double y = 1.0 - 2.0 * (k + 0.5) / n;
        const double r = std::sqrt(1.0 - y * y);
        const double phi = k * 2.399963229728653;
        pts.push_back({r * std::cos(phi), y, r * std::sin(phi)});
    }
    const auto verts = convex_hull_vertices(pts);
    CHECK(verts.size() == static_cast<std::size_t>(n));
}

TEST_CASE("degenerate inputs return every index") {
    CHECK(convex_hull_vertices({}).empty());
    CHECK(convex_hull_vertices({{1, 2, 3}}).size() == 1);
    CHECK(convex_hull_vertices({{0, 0, 0}, {1, 0, 0}}).size() == 2);
    // Collinear.
    CHECK(convex_hull_vertices({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}}).size() == 4);
    // Coplanar.
    CHECK(convex_hull_vertices({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {0.5, 0.5, 0}})
              .size() == 5);
}

TEST_CASE("extreme points in any direction are hull vertices") {
    Rng rng(2025);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Vec3> pts;
        for (int i = 0; i < 150; ++i)
            pts.push_back({rng.normal(), rng.normal(), rng.normal()});
        const auto verts = convex_hull_vertices(pts);
        const std::set<std::size_t> vert_set(verts.begin(), verts.end());
        for (int probe = 0; probe < 60; ++probe) {
            const Vec3 dir{rng.normal(), rng.normal(), rng.normal()};
            std::size_t arg = 0;
            double best = -1e300;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const double d = dir.dot(pts[i]);
                if (d > best) {
                    best = d;
                    arg = i;
                }
            }
            CHECK(vert_set.count(arg) == 1);
        }
    }
}
