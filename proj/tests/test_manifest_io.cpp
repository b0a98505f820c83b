// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/manifest_io.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "cellsplat/error.hpp"
#include "support/synthetic.hpp"
#include "support/tempdir.hpp"

using namespace cellsplat;
using cellsplat::testing::TempDir;

namespace {

CellDataset sample_cell() {
    CellDataset cell;
    cell.spec.row = 1;
    cell.spec.col = 0;
    cell.spec.grid_rows = 2;
    cell.spec.grid_cols = 2;
    cell.spec.original = {10.0, 20.0, -5.0, 5.0};
    cell.spec.expanded = {9.0, 21.0, -6.0, 6.0};
    cell.camera_ids = {2, 5};
    cell.point_ids = {1, 3, 4, 8, 9};
    cell.selection_log = {
        {2, std::numeric_limits<double>::quiet_NaN(), SelectionReason::kPosition},
        {5, 0.37125, SelectionReason::kVisibility},
        {6, 0.12, SelectionReason::kRejected},
    };
    return cell;
}

}  // namespace

TEST_CASE("manifest roundtrip is the identity") {
    TempDir dir;
    const CellDataset cell = sample_cell();
    const auto path = write_cell_dataset(cell, dir / "cell_01_00");
    CHECK(path.filename() == "manifest.json");

    const CellDataset back = load_cell_dataset(dir / "cell_01_00");
    CHECK(back == cell);
}

TEST_CASE("empty cell writes a valid manifest") {
    TempDir dir;
    CellDataset cell;
    cell.spec.original = {0, 1, 0, 1};
    cell.spec.expanded = {0, 1, 0, 1};
    write_cell_dataset(cell, dir / "empty");
    const CellDataset back = load_cell_dataset(dir / "empty");
    CHECK(back.camera_ids.empty());
    CHECK(back.point_ids.empty());
    CHECK(back == cell);
}

TEST_CASE("cell directory export embeds the sparse subset") {
    const SceneBundle scene = testing::make_city_scene(10, 40, /*seed=*/21);
    CellDataset cell;
    cell.spec.original = {0, 50, 0, 50};
    cell.spec.expanded = {0, 60, 0, 60};
    cell.camera_ids = {1, 4, 7};
    cell.point_ids = {2, 3, 10, 11};
    for (int64_t id : cell.camera_ids)
        cell.selection_log.push_back(
            {id, std::numeric_limits<double>::quiet_NaN(), SelectionReason::kPosition});

    TempDir dir;
    export_cell_dir(scene, cell, dir / "cell");
    const CellDirData loaded = load_cell_dir(dir / "cell");

    CHECK(loaded.dataset == cell);
    CHECK(loaded.bundle.cameras.size() == 3);
    CHECK(loaded.bundle.points.size() == 4);
    // tracks in the sub-bundle only reference selected cameras
    for (const auto& pt : loaded.bundle.points)
        for (int64_t cam : pt.track)
            CHECK(std::find(cell.camera_ids.begin(), cell.camera_ids.end(), cam) !=
                  cell.camera_ids.end());
}

TEST_CASE("manifest with unknown camera id fails to load against a bundle") {
    const SceneBundle scene = testing::make_city_scene(4, 6, /*seed=*/2);
    CellDataset cell;
    cell.spec.original = {0, 1, 0, 1};
    cell.spec.expanded = {0, 1, 0, 1};
    cell.camera_ids = {99};  // not in the bundle

    CHECK_THROWS_WITH_AS(validate_cell_against_bundle(cell, scene),
                         doctest::Contains("99"), SchemaError);
    CHECK_THROWS_AS(export_cell_dir(scene, cell, "/nonexistent-unused"), SchemaError);
}

TEST_CASE("unknown point ids are also rejected") {
    const SceneBundle scene = testing::make_city_scene(4, 6, /*seed=*/2);
    CellDataset cell;
    cell.spec.original = {0, 1, 0, 1};
    cell.spec.expanded = {0, 1, 0, 1};
    cell.point_ids = {1234};
    CHECK_THROWS_AS(validate_cell_against_bundle(cell, scene), SchemaError);
}

TEST_CASE("corrupt manifest JSON raises SchemaError") {
    TempDir dir;
    std::filesystem::create_directories(dir / "cell");
    std::ofstream(dir.path() / "cell" / "manifest.json") << "{ not json";
    CHECK_THROWS_AS(load_cell_dataset(dir / "cell"), SchemaError);
}

TEST_CASE("missing manifest raises IoError") {
    TempDir dir;
    CHECK_THROWS_AS(load_cell_dataset(dir / "nope"), IoError);
}
