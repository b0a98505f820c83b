// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>

#include "cellsplat/types.hpp"

namespace cellsplat {

/// Camera-space depth below which a point counts as behind the camera.
inline constexpr double kDepthEpsilon = 1e-6;

/// Least-squares up-axis estimate from camera positions: the normal of the
/// best-fit plane, oriented toward the side the per-camera up vectors point.
/// Throws GeometryError when the camera distribution is degenerate
/// (fewer than 3 cameras, or collinear positions).
Eigen::Vector3d estimate_up_axis(const SceneBundle& bundle);

/// Rotates the scene so `up_hint` (or the estimated up axis) maps to +y.
/// Camera poses, points and world_rotation are updated consistently.
/// Idempotent: re-aligning an aligned bundle is the identity within 1e-6.
SceneBundle manhattan_align(const SceneBundle& bundle,
                            std::optional<Eigen::Vector3d> up_hint = std::nullopt);

/// Pinhole projection of a world point. Returns nullopt when the point's
/// camera-space depth is <= kDepthEpsilon (behind or grazing the camera).
std::optional<Eigen::Vector2d> project_point(const CameraView& camera,
                                             const Eigen::Vector3d& p);

/// Minimal CCW convex polygon containing the inputs (Andrew's monotone
/// chain). Collinear interior vertices are dropped; <= 2 distinct points
/// yield a degenerate polygon of area 0. Ties in the lexicographic sort are
/// broken by y then original index, keeping the result deterministic.
Polygon2 convex_hull(std::span<const Eigen::Vector2d> points);

/// Shoelace area; >= 0 for CCW input, 0 for degenerate polygons.
double polygon_area(const Polygon2& poly);

/// Sutherland-Hodgman clip of a convex polygon against [0,w] x [0,h].
/// An empty intersection yields a degenerate (empty) polygon.
Polygon2 clip_polygon_to_rect(const Polygon2& poly, double w, double h);

/// Point-in-convex-polygon test with a small slack, for oracle sampling and
/// containment checks. The polygon must be CCW.
bool point_in_convex_polygon(const Polygon2& poly, const Eigen::Vector2d& p,
                             double eps = 1e-9);

/// Airspace box over a cell: footprint equals `rect`, vertical extent from
/// ground_y up to the highest point. Throws GeometryError when `points` is
/// empty or every point lies below ground_y (inverted box).
Aabb3 cell_airspace_box(std::span<const Eigen::Vector3d> points, double ground_y,
                        const GroundRect& rect);

/// Projects a world-space axis-aligned box into an image and returns the
/// convex hull of the projection. The box is clipped against the camera's
/// near plane (z = kDepthEpsilon) first so corners behind the camera cannot
/// produce wrap-around hulls. Returns an empty polygon when the whole box
/// is behind the camera.
Polygon2 project_box_hull(const CameraView& camera, const Aabb3& box);

}  // namespace cellsplat
