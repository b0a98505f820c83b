// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace cellsplat {

/// One training view: pinhole intrinsics plus a world-to-camera pose.
/// Only PINHOLE / SIMPLE_PINHOLE intrinsics are representable; distorted
/// models are rejected at load time.
struct CameraView {
    int64_t id = 0;
    std::string image_name;
    int width = 0;
    int height = 0;
    double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
    Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();  // world -> camera
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();         // world -> camera

    /// Camera center in world coordinates, C = -R^T t.
    Eigen::Vector3d center() const {
        return -(rotation.toRotationMatrix().transpose() * translation);
    }

    /// Camera up direction in world coordinates. The camera frame has +y
    /// pointing down the image, so world-up is -R^T e_y.
    Eigen::Vector3d up_world() const {
        return -(rotation.toRotationMatrix().transpose() * Eigen::Vector3d::UnitY());
    }
};

/// One SfM point with the set of camera ids observing it.
struct SparsePoint {
    int64_t id = 0;
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    std::array<uint8_t, 3> color = {0, 0, 0};
    std::vector<int64_t> track;  // observing camera ids, sorted ascending
};

/// A full SfM reconstruction: cameras, points, and the accumulated world
/// rotation (identity until Manhattan alignment is applied).
struct SceneBundle {
    std::vector<CameraView> cameras;
    std::vector<SparsePoint> points;
    Eigen::Matrix3d world_rotation = Eigen::Matrix3d::Identity();

    const CameraView* find_camera(int64_t id) const {
        for (const auto& c : cameras)
            if (c.id == id) return &c;
        return nullptr;
    }
};

/// Validates uniqueness of ids, quaternion norms, track references and
/// world_rotation orthonormality. Throws SchemaError on violation.
void validate_bundle(const SceneBundle& bundle, bool require_nonempty_tracks = false);

/// Per-Gaussian attributes in the 3DGS layout: opacity is a pre-sigmoid
/// logit, scales are log-space. Stored as float32 to match the on-disk PLY
/// representation bit-for-bit.
struct GaussianModel {
    int64_t count = 0;
    std::vector<float> positions;  // count x 3
    std::vector<float> sh_dc;      // count x 3
    std::vector<float> sh_rest;    // count x 45
    std::vector<float> opacity;    // count x 1
    std::vector<float> scales;     // count x 3
    std::vector<float> rotations;  // count x 4
};

/// Checks array sizes against count and scans for NaN/Inf.
void validate_gaussians(const GaussianModel& model);

/// Axis-aligned rectangle on the ground plane (y is up after alignment).
/// Membership is half-open: [min_x, max_x) x [min_z, max_z).
struct GroundRect {
    double min_x = 0.0, max_x = 0.0;
    double min_z = 0.0, max_z = 0.0;

    bool valid() const { return min_x < max_x && min_z < max_z; }
    double width() const { return max_x - min_x; }
    double depth() const { return max_z - min_z; }
    bool contains(double x, double z) const {
        return x >= min_x && x < max_x && z >= min_z && z < max_z;
    }
    bool operator==(const GroundRect&) const = default;
};

/// Axis-aligned box in world units.
struct Aabb3 {
    Eigen::Vector3d min = Eigen::Vector3d::Zero();
    Eigen::Vector3d max = Eigen::Vector3d::Zero();
};

/// Planar polygon in pixel coordinates, counter-clockwise when area > 0.
struct Polygon2 {
    std::vector<Eigen::Vector2d> vertices;
};

/// One grid cell: indices plus original and expanded ground bounds.
/// Cells on the grid's max edge close their outer boundary so the tiling
/// covers the whole camera bounding rect.
struct CellSpec {
    int row = 0, col = 0;
    int grid_rows = 1, grid_cols = 1;
    GroundRect original;
    GroundRect expanded;

    bool closes_max_x() const { return row == grid_rows - 1; }
    bool closes_max_z() const { return col == grid_cols - 1; }

    /// Half-open membership in the original rect, closed on outer grid edges.
    bool original_contains(double x, double z) const {
        const bool in_x = x >= original.min_x &&
                          (x < original.max_x || (closes_max_x() && x == original.max_x));
        const bool in_z = z >= original.min_z &&
                          (z < original.max_z || (closes_max_z() && z == original.max_z));
        return in_x && in_z;
    }
    bool operator==(const CellSpec&) const = default;
};

enum class SelectionReason { kPosition, kVisibility, kRejected };

const char* to_string(SelectionReason r);
SelectionReason selection_reason_from_string(const std::string& s);

/// One row of the camera-selection audit: why a camera was (not) taken.
/// `visibility` is NaN for position-selected cameras, which never go
/// through the visibility computation.
struct SelectionRecord {
    int64_t camera_id = 0;
    double visibility = std::numeric_limits<double>::quiet_NaN();
    SelectionReason reason = SelectionReason::kPosition;

    bool operator==(const SelectionRecord& o) const {
        const bool vis_eq = (std::isnan(visibility) && std::isnan(o.visibility)) ||
                            visibility == o.visibility;
        return camera_id == o.camera_id && vis_eq && reason == o.reason;
    }
};

/// A cell's assigned training data: camera and point id sets plus the
/// selection log (selected cameras and rejected candidates alike).
struct CellDataset {
    CellSpec spec;
    std::vector<int64_t> camera_ids;  // sorted ascending
    std::vector<int64_t> point_ids;   // sorted ascending
    std::vector<SelectionRecord> selection_log;  // sorted by camera id

    bool operator==(const CellDataset&) const = default;
};

enum class VisibilityMode { kAirspaceAware, kAirspaceAgnostic };

const char* to_string(VisibilityMode m);

/// Knobs for the partition pipeline. Defaults follow the reference
/// large-scene setup: 25% visibility threshold, 20% boundary expansion.
struct PartitionConfig {
    int grid_rows = 2;                 // m: sections along x
    int grid_cols = 2;                 // n: segments along z per section
    double expansion_ratio = 0.20;
    double visibility_threshold = 0.25;
    VisibilityMode visibility_mode = VisibilityMode::kAirspaceAware;
    bool clip_to_image = true;
    /// Ground plane height for airspace boxes. NaN means "derive from the
    /// scene": the ground_percentile quantile of point y values.
    double ground_y = std::numeric_limits<double>::quiet_NaN();
    double ground_percentile = 0.05;

    void validate() const;
};

}  // namespace cellsplat
