// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/geometry.hpp"

#include <doctest.h>

#include <random>
#include <set>

#include "cellsplat/error.hpp"
#include "support/synthetic.hpp"

using namespace cellsplat;

namespace {

double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a,
             const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// O(n^3) hull-vertex oracle: the directed pair (a, b) is a hull edge iff
// every other point lies strictly to its left (collinear third points on
// the open segment are allowed; beyond the segment they disqualify the
// edge). Hull vertices are the endpoints of surviving edges.
std::set<std::pair<double, double>> brute_force_hull_vertices(
    const std::vector<Eigen::Vector2d>& pts) {
    std::set<std::pair<double, double>> verts;
    const size_t n = pts.size();
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            if (i == j || pts[i] == pts[j]) continue;
            bool is_edge = true;
            for (size_t k = 0; k < n && is_edge; ++k) {
                if (k == i || k == j) continue;
                const double c = cross(pts[i], pts[j], pts[k]);
                if (c < 0.0) is_edge = false;
                if (c == 0.0) {
                    // collinear: must lie strictly inside the segment
                    const double t = (pts[k] - pts[i]).dot(pts[j] - pts[i]) /
                                     (pts[j] - pts[i]).squaredNorm();
                    if (t <= 0.0 || t >= 1.0) is_edge = false;
                }
            }
            if (is_edge) {
                verts.insert({pts[i].x(), pts[i].y()});
                verts.insert({pts[j].x(), pts[j].y()});
            }
        }
    }
    return verts;
}

std::vector<Eigen::Vector2d> random_points(int n, uint64_t seed, double lo = 0.0,
                                           double hi = 100.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<Eigen::Vector2d> pts(n);
    for (auto& p : pts) p = {d(rng), d(rng)};
    return pts;
}

}  // namespace

TEST_CASE("convex hull: square with interior point") {
    std::vector<Eigen::Vector2d> pts = {
        {0, 0}, {1, 0}, {0, 1}, {1, 1}, {0.5, 0.5}};
    const Polygon2 hull = convex_hull(pts);
    CHECK(hull.vertices.size() == 4);
    CHECK(polygon_area(hull) == doctest::Approx(1.0));
}

TEST_CASE("convex hull: collinear input degenerates to area zero") {
    std::vector<Eigen::Vector2d> pts = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    const Polygon2 hull = convex_hull(pts);
    CHECK(hull.vertices.size() <= 2);
    CHECK(polygon_area(hull) == 0.0);
}

TEST_CASE("convex hull matches the brute-force oracle") {
    for (uint64_t seed = 1; seed <= 30; ++seed) {
        const int n = 3 + static_cast<int>(seed * 7 % 198);
        auto pts = random_points(n, seed);
        const Polygon2 hull = convex_hull(pts);
        const auto oracle = brute_force_hull_vertices(pts);

        std::set<std::pair<double, double>> got;
        for (const auto& v : hull.vertices) got.insert({v.x(), v.y()});
        CHECK(got == oracle);
        CHECK(polygon_area(hull) >= 0.0);  // CCW
    }
}

TEST_CASE("convex hull handles duplicates and integer collinearity") {
    // grid points: many exact collinear triples
    std::vector<Eigen::Vector2d> pts;
    for (int x = 0; x <= 4; ++x)
        for (int y = 0; y <= 4; ++y) pts.push_back({double(x), double(y)});
    pts.push_back({2, 2});  // duplicate
    const Polygon2 hull = convex_hull(pts);
    CHECK(hull.vertices.size() == 4);  // collinear edge points removed
    CHECK(polygon_area(hull) == doctest::Approx(16.0));

    const auto oracle = brute_force_hull_vertices(pts);
    std::set<std::pair<double, double>> got;
    for (const auto& v : hull.vertices) got.insert({v.x(), v.y()});
    CHECK(got == oracle);
}

TEST_CASE("hull idempotence and containment monotonicity") {
    for (uint64_t seed = 100; seed < 110; ++seed) {
        auto pts = random_points(60, seed);
        const Polygon2 h1 = convex_hull(pts);
        const Polygon2 h2 = convex_hull(h1.vertices);
        REQUIRE(h1.vertices.size() == h2.vertices.size());
        for (size_t i = 0; i < h1.vertices.size(); ++i)
            CHECK(h1.vertices[i] == h2.vertices[i]);

        // subset hull area <= superset hull area
        std::vector<Eigen::Vector2d> subset(pts.begin(), pts.begin() + 30);
        CHECK(polygon_area(convex_hull(subset)) <= polygon_area(h1) + 1e-12);
    }
}

TEST_CASE("polygon area: unit square and degenerate cases") {
    Polygon2 square;
    square.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(polygon_area(square) == doctest::Approx(1.0));

    Polygon2 empty;
    CHECK(polygon_area(empty) == 0.0);
    Polygon2 segment;
    segment.vertices = {{0, 0}, {1, 1}};
    CHECK(polygon_area(segment) == 0.0);
}

TEST_CASE("polygon area matches Monte-Carlo sampling") {
    for (uint64_t seed = 5; seed < 10; ++seed) {
        const Polygon2 poly = convex_hull(random_points(40, seed));
        const double area = polygon_area(poly);

        std::mt19937_64 rng(seed * 977);
        std::uniform_real_distribution<double> d(0.0, 100.0);
        const int samples = 200000;
        int inside = 0;
        for (int i = 0; i < samples; ++i) {
            if (point_in_convex_polygon(poly, {d(rng), d(rng)})) ++inside;
        }
        const double mc = 100.0 * 100.0 * inside / samples;
        CHECK(std::abs(mc - area) / area < 0.01);
    }
}

TEST_CASE("clip: fully inside stays, fully outside vanishes") {
    Polygon2 inside;
    inside.vertices = {{10, 10}, {20, 10}, {20, 20}, {10, 20}};
    const Polygon2 kept = clip_polygon_to_rect(inside, 100, 100);
    CHECK(polygon_area(kept) == doctest::Approx(100.0));

    Polygon2 outside;
    outside.vertices = {{200, 200}, {210, 200}, {210, 210}, {200, 210}};
    const Polygon2 gone = clip_polygon_to_rect(outside, 100, 100);
    CHECK(polygon_area(gone) == 0.0);
}

TEST_CASE("clip: half-overlapping square has the analytic area") {
    // square [-5, 5]^2 against a 10x10 image: overlap is [0,5]x[0,5]
    Polygon2 poly;
    poly.vertices = {{-5, -5}, {5, -5}, {5, 5}, {-5, 5}};
    const Polygon2 clipped = clip_polygon_to_rect(poly, 10, 10);
    CHECK(polygon_area(clipped) == doctest::Approx(25.0));
}

TEST_CASE("clip containment property") {
    for (uint64_t seed = 40; seed < 50; ++seed) {
        const Polygon2 poly = convex_hull(random_points(30, seed, -50.0, 150.0));
        const Polygon2 clipped = clip_polygon_to_rect(poly, 100, 100);
        CHECK(polygon_area(clipped) <= polygon_area(poly) + 1e-9);
        CHECK(polygon_area(clipped) <= 100.0 * 100.0 + 1e-9);
        for (const auto& v : clipped.vertices) {
            CHECK(v.x() >= -1e-9);
            CHECK(v.x() <= 100.0 + 1e-9);
            CHECK(v.y() >= -1e-9);
            CHECK(v.y() <= 100.0 + 1e-9);
            if (poly.vertices.size() >= 3)
                CHECK(point_in_convex_polygon(poly, v, 1e-6));
        }
    }
}

TEST_CASE("project_point: hand-computed pinhole cases") {
    CameraView cam;
    cam.id = 1;
    cam.width = 100;
    cam.height = 100;
    cam.fx = cam.fy = 100.0;
    cam.cx = cam.cy = 50.0;

    SUBCASE("point on the optical axis lands on the principal point") {
        const auto uv = project_point(cam, {0, 0, 7.0});
        REQUIRE(uv.has_value());
        CHECK(uv->x() == doctest::Approx(50.0));
        CHECK(uv->y() == doctest::Approx(50.0));
    }
    SUBCASE("u = fx*x/z + cx") {
        const auto uv = project_point(cam, {1, 0, 10});
        REQUIRE(uv.has_value());
        CHECK(uv->x() == doctest::Approx(60.0));
        CHECK(uv->y() == doctest::Approx(50.0));
    }
    SUBCASE("zero depth reports behind-camera") {
        CHECK_FALSE(project_point(cam, {1, 0, 0}).has_value());
        CHECK_FALSE(project_point(cam, {0, 0, -5}).has_value());
    }
}

TEST_CASE("projection convexity: projected combinations stay in the hull") {
    const CameraView cam = testing::make_camera(1, {0, 40, 0}, {10, 0, 10});
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> d(0.0, 20.0);
    std::uniform_real_distribution<double> t(0.0, 1.0);

    std::vector<Eigen::Vector3d> gen(8);
    for (auto& g : gen) g = {d(rng), d(rng) * 0.2, d(rng)};
    std::vector<Eigen::Vector2d> proj;
    for (const auto& g : gen) {
        const auto uv = project_point(cam, g);
        REQUIRE(uv.has_value());
        proj.push_back(*uv);
    }
    const Polygon2 hull = convex_hull(proj);
    REQUIRE(hull.vertices.size() >= 3);

    for (int i = 0; i < 200; ++i) {
        // random convex combination of two generators
        const auto& a = gen[i % gen.size()];
        const auto& b = gen[(i * 7 + 3) % gen.size()];
        const double alpha = t(rng);
        const auto uv = project_point(cam, alpha * a + (1 - alpha) * b);
        REQUIRE(uv.has_value());
        CHECK(point_in_convex_polygon(hull, *uv, 1e-6));
    }
}

TEST_CASE("manhattan_align: aligned bundle with axis hint is identity") {
    SceneBundle bundle = testing::make_ring_scene(12, {0, 1, 0});
    const SceneBundle aligned = manhattan_align(bundle, Eigen::Vector3d(0, 1, 0));
    CHECK((aligned.world_rotation - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    for (size_t i = 0; i < bundle.cameras.size(); ++i)
        CHECK((aligned.cameras[i].center() - bundle.cameras[i].center()).norm() < 1e-12);
}

TEST_CASE("manhattan_align recovers a known tilt") {
    const Eigen::Vector3d true_up = Eigen::Vector3d(0.3, 1.0, -0.2).normalized();
    SceneBundle bundle = testing::make_ring_scene(24, true_up);

    const Eigen::Vector3d estimated = estimate_up_axis(bundle);
    CHECK(std::acos(std::clamp(estimated.dot(true_up), -1.0, 1.0)) < 1e-4);

    const SceneBundle aligned = manhattan_align(bundle);
    const Eigen::Vector3d up_after = aligned.world_rotation * true_up;
    CHECK(std::acos(std::clamp(up_after.dot(Eigen::Vector3d::UnitY()), -1.0, 1.0)) <
          1e-4);

    // camera-to-point geometry is preserved
    for (const auto& cam : aligned.cameras) {
        const auto uv = project_point(cam, Eigen::Vector3d::Zero());
        REQUIRE(uv.has_value());
        CHECK(uv->x() == doctest::Approx(cam.cx).epsilon(1e-6));
        CHECK(uv->y() == doctest::Approx(cam.cy).epsilon(1e-6));
    }
}

TEST_CASE("manhattan_align is idempotent") {
    SceneBundle bundle =
        testing::make_ring_scene(16, Eigen::Vector3d(0.1, 1.0, 0.4).normalized());
    const SceneBundle once = manhattan_align(bundle);
    const SceneBundle twice = manhattan_align(once);
    CHECK((twice.world_rotation - once.world_rotation).norm() < 1e-6);
}

TEST_CASE("manhattan_align: collinear cameras raise a degeneracy error") {
    SceneBundle bundle;
    for (int i = 0; i < 6; ++i)
        bundle.cameras.push_back(
            testing::make_camera(i + 1, {double(i), 0, 0}, {double(i), -1, 0}));
    CHECK_THROWS_AS(manhattan_align(bundle), GeometryError);
    CHECK_THROWS_AS(estimate_up_axis(bundle), GeometryError);
}

TEST_CASE("cell_airspace_box: heights and inverted-box error") {
    const GroundRect rect{0, 10, 0, 10};
    SUBCASE("single point") {
        std::vector<Eigen::Vector3d> pts = {{5, 5, 5}};
        const Aabb3 box = cell_airspace_box(pts, 0.0, rect);
        CHECK(box.max.y() - box.min.y() == doctest::Approx(5.0));
        CHECK(box.min.x() == 0.0);
        CHECK(box.max.x() == 10.0);
    }
    SUBCASE("max minus ground") {
        std::vector<Eigen::Vector3d> pts = {{1, 3.0, 1}, {2, 12.3, 2}, {3, 7.5, 3}};
        const Aabb3 box = cell_airspace_box(pts, 2.3, rect);
        CHECK(box.max.y() - box.min.y() == doctest::Approx(10.0));
    }
    SUBCASE("all points below the ground plane") {
        std::vector<Eigen::Vector3d> pts = {{1, -1, 1}, {2, -3, 2}};
        CHECK_THROWS_AS(cell_airspace_box(pts, 0.0, rect), GeometryError);
    }
    SUBCASE("empty point set") {
        CHECK_THROWS_AS(cell_airspace_box({}, 0.0, rect), GeometryError);
    }
}

TEST_CASE("project_box_hull clips boxes straddling the near plane") {
    CameraView cam;  // identity pose at the origin, looking down +z
    cam.id = 1;
    cam.width = 200;
    cam.height = 200;
    cam.fx = cam.fy = 100.0;
    cam.cx = cam.cy = 100.0;

    SUBCASE("box fully behind yields an empty hull") {
        Aabb3 box;
        box.min = {-1, -1, -10};
        box.max = {1, 1, -1};
        CHECK(project_box_hull(cam, box).vertices.empty());
    }
    SUBCASE("box surrounding the camera still projects sanely") {
        Aabb3 box;
        box.min = {-2, -2, -2};
        box.max = {2, 2, 2};
        const Polygon2 hull = project_box_hull(cam, box);
        CHECK(polygon_area(hull) > 0.0);
    }
    SUBCASE("box in front projects to the analytic square") {
        Aabb3 box;
        box.min = {-1, -1, 10};
        box.max = {1, 1, 12};
        const Polygon2 hull = project_box_hull(cam, box);
        // near face dominates: half-width 100 * 1/10 = 10 pixels
        CHECK(polygon_area(hull) == doctest::Approx(400.0).epsilon(1e-6));
    }
}
