// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>

#include "cellsplat/types.hpp"

namespace cellsplat {

/// Balanced grid division of the camera ground positions: the x axis is
/// split into `rows` sections at camera-count quantiles (section sizes
/// differ by at most one), then each section is split into `cols` segments
/// by z the same way. Cell rects tile the camera bounding rect exactly;
/// boundaries sit midway between the extreme cameras of adjacent groups.
/// Throws GeometryError when there are fewer cameras than cells.
std::vector<CellSpec> divide_regions(const SceneBundle& bundle, int rows, int cols);

/// Concentric expansion: each side length is multiplied by (1 + ratio).
/// Throws ConfigError on a negative ratio.
CellSpec expand_cell(const CellSpec& spec, double ratio);

/// Cameras and points whose ground position lies in the expanded rect
/// (min edges inclusive, max edges exclusive). Selection reason: position.
CellDataset position_select(const SceneBundle& bundle, const CellSpec& spec);

/// Fraction of image i covered by the projection of the cell, Omega_ij /
/// Omega_i. Airspace-aware mode projects the cell's airspace box (footprint
/// = `footprint`, vertical extent from ground_y to the highest cell point);
/// airspace-agnostic mode projects the cell's points directly. The hull is
/// clipped to the image bounds unless clip_to_image is off. Returns 0 when
/// everything lies behind the camera. Throws GeometryError when
/// `cell_points` is empty.
double visibility(const CameraView& camera, std::span<const Eigen::Vector3d> cell_points,
                  const GroundRect& footprint, double ground_y, VisibilityMode mode,
                  bool clip_to_image);

/// Adds every not-yet-selected camera whose visibility exceeds the
/// threshold (strictly) with reason = visibility; rejected candidates are
/// logged with their computed value. Cells with no points are left as
/// position-only selections. Candidate evaluation runs in parallel.
void visibility_camera_select(const SceneBundle& bundle, CellDataset& cell,
                              const PartitionConfig& config, double ground_y);

/// Adds every point observed by at least one of the cell's cameras.
void coverage_point_select(const SceneBundle& bundle, CellDataset& cell);

/// The `ground_percentile` quantile of point y values (robust "ground
/// plane" height). Returns 0 for a pointless bundle.
double scene_ground_y(const SceneBundle& bundle, double percentile);

struct PartitionResult {
    std::vector<CellDataset> cells;  // row-major
    PartitionConfig config;
    double ground_y = 0.0;
};

/// The full pipeline: divide -> expand -> position -> visibility ->
/// coverage, per cell. Deterministic for fixed inputs and config,
/// independent of thread count.
PartitionResult partition_scene(const SceneBundle& bundle, const PartitionConfig& config);

/// Per-cell counts and visibility histograms as a JSON document.
std::string partition_summary_json(const PartitionResult& result,
                                   const SceneBundle& bundle);

/// Ground-plane diagram: cell rects plus cameras colored by selection
/// reason. Rendered from the same data partition_summary_json captures, so
/// the plot can be re-created later from the summary alone.
std::string partition_layout_svg(const PartitionResult& result,
                                 const SceneBundle& bundle);
std::string partition_layout_svg_from_summary(const std::string& summary_json);

}  // namespace cellsplat
