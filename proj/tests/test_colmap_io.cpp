// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/colmap_io.hpp"

#include <doctest.h>

#include <fstream>

#include "cellsplat/error.hpp"
#include "support/synthetic.hpp"
#include "support/tempdir.hpp"

using namespace cellsplat;
using cellsplat::testing::TempDir;

namespace {

void check_bundles_equal(const SceneBundle& a, const SceneBundle& b,
                         double tol = 1e-12) {
    REQUIRE(a.cameras.size() == b.cameras.size());
    REQUIRE(a.points.size() == b.points.size());
    for (size_t i = 0; i < a.cameras.size(); ++i) {
        const auto& ca = a.cameras[i];
        const auto& cb = b.cameras[i];
        CHECK(ca.id == cb.id);
        CHECK(ca.image_name == cb.image_name);
        CHECK(ca.width == cb.width);
        CHECK(ca.height == cb.height);
        CHECK(ca.fx == doctest::Approx(cb.fx).epsilon(tol));
        CHECK(ca.fy == doctest::Approx(cb.fy).epsilon(tol));
        CHECK(ca.cx == doctest::Approx(cb.cx).epsilon(tol));
        CHECK(ca.cy == doctest::Approx(cb.cy).epsilon(tol));
        CHECK((ca.center() - cb.center()).norm() < 1e-9);
    }
    for (size_t i = 0; i < a.points.size(); ++i) {
        const auto& pa = a.points[i];
        const auto& pb = b.points[i];
        CHECK(pa.id == pb.id);
        CHECK((pa.position - pb.position).norm() < 1e-9);
        CHECK(pa.color == pb.color);
        CHECK(pa.track == pb.track);
    }
}

}  // namespace

TEST_CASE("hand-written text model loads field by field") {
    TempDir dir;
    {
        std::ofstream f(dir / "cameras.txt");
        f << "# comment line\n";
        f << "1 PINHOLE 640 480 500 510 320 240\n";
        f << "2 SIMPLE_PINHOLE 100 100 90 50 50\n";
    }
    {
        std::ofstream f(dir / "images.txt");
        f << "# IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME\n";
        f << "1 1 0 0 0 0.5 -1 2 1 left.png\n\n";
        f << "2 0.7071067811865476 0 0.7071067811865476 0 1 0 0 2 right.png\n\n";
    }
    {
        std::ofstream f(dir / "points3D.txt");
        f << "# POINT3D_ID X Y Z R G B ERROR TRACK\n";
        f << "7 1.5 2.5 3.5 255 0 12 0.1 1 0 2 3\n";
        f << "8 -1 0 4 0 255 0 0.0 2 1\n";
        f << "9 0 0 1 9 9 9 0.0 1 5\n";
    }

    const SceneBundle bundle = load_colmap_sparse(dir.path());
    REQUIRE(bundle.cameras.size() == 2);
    REQUIRE(bundle.points.size() == 3);

    CHECK(bundle.cameras[0].id == 1);
    CHECK(bundle.cameras[0].image_name == "left.png");
    CHECK(bundle.cameras[0].fx == 500.0);
    CHECK(bundle.cameras[0].fy == 510.0);
    CHECK(bundle.cameras[0].cx == 320.0);
    CHECK(bundle.cameras[0].cy == 240.0);
    CHECK(bundle.cameras[0].translation == Eigen::Vector3d(0.5, -1, 2));

    CHECK(bundle.cameras[1].fx == 90.0);  // SIMPLE_PINHOLE: fx == fy == f
    CHECK(bundle.cameras[1].fy == 90.0);

    CHECK(bundle.points[0].id == 7);
    CHECK(bundle.points[0].position == Eigen::Vector3d(1.5, 2.5, 3.5));
    CHECK(bundle.points[0].color == std::array<uint8_t, 3>{255, 0, 12});
    CHECK(bundle.points[0].track == std::vector<int64_t>{1, 2});
    CHECK(bundle.points[1].track == std::vector<int64_t>{2});
}

TEST_CASE("empty points3D file yields zero points without error") {
    TempDir dir;
    {
        std::ofstream f(dir / "cameras.txt");
        f << "1 PINHOLE 10 10 5 5 5 5\n";
    }
    {
        std::ofstream f(dir / "images.txt");
        f << "1 1 0 0 0 0 0 0 1 a.png\n\n";
    }
    { std::ofstream f(dir / "points3D.txt"); }

    const SceneBundle bundle = load_colmap_sparse(dir.path());
    CHECK(bundle.cameras.size() == 1);
    CHECK(bundle.points.empty());
    CHECK(bundle.world_rotation == Eigen::Matrix3d::Identity());
}

TEST_CASE("binary and text encodings load to identical bundles") {
    const SceneBundle scene = testing::make_city_scene(17, 60, /*seed=*/5);
    TempDir dir;
    write_colmap_sparse(scene, dir / "bin", ColmapFormat::kBinary);
    write_colmap_sparse(scene, dir / "txt", ColmapFormat::kText);

    const SceneBundle from_bin = load_colmap_sparse(dir / "bin");
    const SceneBundle from_txt = load_colmap_sparse(dir / "txt");
    check_bundles_equal(from_bin, from_txt);
    check_bundles_equal(from_bin, scene);
}

TEST_CASE("unsupported camera models are rejected by name") {
    TempDir dir;
    {
        std::ofstream f(dir / "cameras.txt");
        f << "1 SIMPLE_RADIAL 640 480 500 320 240 0.1\n";
    }
    {
        std::ofstream f(dir / "images.txt");
        f << "1 1 0 0 0 0 0 0 1 a.png\n\n";
    }
    { std::ofstream f(dir / "points3D.txt"); }

    CHECK_THROWS_WITH_AS(load_colmap_sparse(dir.path()),
                         doctest::Contains("SIMPLE_RADIAL"), SchemaError);
}

TEST_CASE("missing files and malformed records raise named errors") {
    TempDir dir;
    SUBCASE("no model at all") {
        CHECK_THROWS_AS(load_colmap_sparse(dir.path()), IoError);
    }
    SUBCASE("cameras present but images missing") {
        std::ofstream f(dir / "cameras.txt");
        f << "1 PINHOLE 10 10 5 5 5 5\n";
        f.close();
        CHECK_THROWS_AS(load_colmap_sparse(dir.path()), IoError);
    }
    SUBCASE("image referencing an unknown camera") {
        {
            std::ofstream f(dir / "cameras.txt");
            f << "1 PINHOLE 10 10 5 5 5 5\n";
        }
        {
            std::ofstream f(dir / "images.txt");
            f << "1 1 0 0 0 0 0 0 99 a.png\n\n";
        }
        { std::ofstream f(dir / "points3D.txt"); }
        CHECK_THROWS_AS(load_colmap_sparse(dir.path()), SchemaError);
    }
    SUBCASE("garbled image record") {
        {
            std::ofstream f(dir / "cameras.txt");
            f << "1 PINHOLE 10 10 5 5 5 5\n";
        }
        {
            std::ofstream f(dir / "images.txt");
            f << "1 not_a_number 0 0 0 0 0 0 1 a.png\n\n";
        }
        { std::ofstream f(dir / "points3D.txt"); }
        CHECK_THROWS_AS(load_colmap_sparse(dir.path()), SchemaError);
    }
}

TEST_CASE("model directories under sparse/0 are found") {
    const SceneBundle scene = testing::make_city_scene(5, 10, /*seed=*/11);
    TempDir dir;
    write_colmap_sparse(scene, dir.path() / "sparse" / "0", ColmapFormat::kBinary);
    const SceneBundle loaded = load_colmap_sparse(dir.path());
    CHECK(loaded.cameras.size() == 5);
    CHECK(loaded.points.size() == 10);
}
