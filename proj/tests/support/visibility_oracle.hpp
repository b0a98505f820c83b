// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <vector>

#include "cellsplat/types.hpp"

namespace cellsplat::testing {

/// Pixel-sampling visibility oracle, independent of the hull/clip/area
/// implementation: a pixel counts as covered when the ray through its
/// center hits the cell geometry.

/// Ray-AABB slab test in world space for the airspace-aware definition.
inline double sample_visibility_box(const CameraView& cam, const Aabb3& box) {
    const Eigen::Matrix3d r_t = cam.rotation.toRotationMatrix().transpose();
    const Eigen::Vector3d origin = cam.center();
    int covered = 0;
    for (int v = 0; v < cam.height; ++v) {
        for (int u = 0; u < cam.width; ++u) {
            const Eigen::Vector3d dir_cam((u + 0.5 - cam.cx) / cam.fx,
                                          (v + 0.5 - cam.cy) / cam.fy, 1.0);
            const Eigen::Vector3d dir = r_t * dir_cam;
            double tmin = 1e-9, tmax = 1e30;
            bool hit = true;
            for (int a = 0; a < 3 && hit; ++a) {
                if (std::abs(dir[a]) < 1e-15) {
                    if (origin[a] < box.min[a] || origin[a] > box.max[a]) hit = false;
                } else {
                    double t0 = (box.min[a] - origin[a]) / dir[a];
                    double t1 = (box.max[a] - origin[a]) / dir[a];
                    if (t0 > t1) std::swap(t0, t1);
                    tmin = std::max(tmin, t0);
                    tmax = std::min(tmax, t1);
                    if (tmin > tmax) hit = false;
                }
            }
            if (hit) ++covered;
        }
    }
    return static_cast<double>(covered) /
           (static_cast<double>(cam.width) * cam.height);
}

/// Point-hull coverage via an O(n^3)-style half-plane test: a pixel is
/// covered when it cannot be separated from the projected points by any
/// directed edge between two of them (i.e. it lies in their convex hull).
inline double sample_visibility_points(const CameraView& cam,
                                       const std::vector<Eigen::Vector2d>& projected) {
    if (projected.size() < 3) return 0.0;
    // collect hull edges by the brute-force all-pairs test
    struct Edge {
        Eigen::Vector2d a, d;
    };
    std::vector<Edge> edges;
    const size_t n = projected.size();
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const Eigen::Vector2d d = projected[j] - projected[i];
            if (d.squaredNorm() == 0.0) continue;
            bool all_left = true;
            for (size_t k = 0; k < n && all_left; ++k) {
                if (k == i || k == j) continue;
                const Eigen::Vector2d e = projected[k] - projected[i];
                if (d.x() * e.y() - d.y() * e.x() < 0.0) all_left = false;
            }
            if (all_left) edges.push_back({projected[i], d});
        }
    if (edges.empty()) return 0.0;

    int covered = 0;
    for (int v = 0; v < cam.height; ++v)
        for (int u = 0; u < cam.width; ++u) {
            const Eigen::Vector2d p(u + 0.5, v + 0.5);
            bool inside = true;
            for (const auto& e : edges) {
                const Eigen::Vector2d q = p - e.a;
                if (e.d.x() * q.y() - e.d.y() * q.x() < 0.0) {
                    inside = false;
                    break;
                }
            }
            if (inside) ++covered;
        }
    return static_cast<double>(covered) /
           (static_cast<double>(cam.width) * cam.height);
}

}  // namespace cellsplat::testing
