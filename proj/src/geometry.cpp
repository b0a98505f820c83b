// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>

#include "cellsplat/error.hpp"

namespace cellsplat {

Eigen::Vector3d estimate_up_axis(const SceneBundle& bundle) {
    const size_t n = bundle.cameras.size();
    if (n < 3)
        throw GeometryError("up-axis estimation needs at least 3 cameras, got " +
                            std::to_string(n));

    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    std::vector<Eigen::Vector3d> centers;
    centers.reserve(n);
    for (const auto& cam : bundle.cameras) {
        centers.push_back(cam.center());
        centroid += centers.back();
    }
    centroid /= static_cast<double>(n);

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& c : centers) {
        const Eigen::Vector3d d = c - centroid;
        cov += d * d.transpose();
    }

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    const Eigen::Vector3d evals = solver.eigenvalues();  // ascending
    // Collinear cameras leave two vanishing eigenvalues and no usable plane.
    if (evals(2) <= 0.0 || evals(1) / evals(2) < 1e-9)
        throw GeometryError("degenerate camera distribution: cameras are collinear, "
                            "cannot estimate an up axis (pass an explicit hint)");

    Eigen::Vector3d normal = solver.eigenvectors().col(0);

    // Orient toward the hemisphere the camera up vectors point into.
    double vote = 0.0;
    for (const auto& cam : bundle.cameras) vote += normal.dot(cam.up_world());
    if (vote < 0.0) normal = -normal;
    return normal.normalized();
}

namespace {

Eigen::Matrix3d rotation_to_y(const Eigen::Vector3d& up) {
    const Eigen::Vector3d u = up.normalized();
    const Eigen::Vector3d y = Eigen::Vector3d::UnitY();
    const double c = u.dot(y);
    if (c > 1.0 - 1e-15) return Eigen::Matrix3d::Identity();
    if (c < -1.0 + 1e-15)  // antiparallel: half turn about x
        return Eigen::AngleAxisd(M_PI, Eigen::Vector3d::UnitX()).toRotationMatrix();
    const Eigen::Vector3d axis = u.cross(y).normalized();
    return Eigen::AngleAxisd(std::acos(std::clamp(c, -1.0, 1.0)), axis).toRotationMatrix();
}

}  // namespace

SceneBundle manhattan_align(const SceneBundle& bundle,
                            std::optional<Eigen::Vector3d> up_hint) {
    const Eigen::Vector3d up = up_hint ? up_hint->normalized() : estimate_up_axis(bundle);
    const Eigen::Matrix3d align = rotation_to_y(up);

    SceneBundle out = bundle;
    out.world_rotation = align * bundle.world_rotation;
    for (auto& cam : out.cameras) {
        // World points transform as p' = A p, so R' = R A^T keeps R' p' + t
        // equal to R p + t.
        const Eigen::Matrix3d r_new = cam.rotation.toRotationMatrix() * align.transpose();
        cam.rotation = Eigen::Quaterniond(r_new).normalized();
    }
    for (auto& pt : out.points) pt.position = align * pt.position;
    return out;
}

std::optional<Eigen::Vector2d> project_point(const CameraView& camera,
                                             const Eigen::Vector3d& p) {
    const Eigen::Vector3d pc = camera.rotation * p + camera.translation;
    if (pc.z() <= kDepthEpsilon) return std::nullopt;
    return Eigen::Vector2d(camera.fx * pc.x() / pc.z() + camera.cx,
                           camera.fy * pc.y() / pc.z() + camera.cy);
}

namespace {

double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a,
              const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

Polygon2 convex_hull(std::span<const Eigen::Vector2d> points) {
    std::vector<size_t> order(points.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
        const auto &a = points[i], &b = points[j];
        if (a.x() != b.x()) return a.x() < b.x();
        if (a.y() != b.y()) return a.y() < b.y();
        return i < j;
    });
    // Drop exact duplicates so they cannot linger as zero-length hull edges.
    std::vector<Eigen::Vector2d> pts;
    pts.reserve(points.size());
    for (size_t k : order) {
        if (pts.empty() || pts.back() != points[k]) pts.push_back(points[k]);
    }

    Polygon2 hull;
    if (pts.size() <= 2) {
        hull.vertices = std::move(pts);
        return hull;
    }

    std::vector<Eigen::Vector2d> h(2 * pts.size());
    size_t k = 0;
    for (const auto& p : pts) {  // lower chain
        while (k >= 2 && cross2(h[k - 2], h[k - 1], p) <= 0) --k;
        h[k++] = p;
    }
    const size_t lower = k + 1;
    for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {  // upper chain
        while (k >= lower && cross2(h[k - 2], h[k - 1], *it) <= 0) --k;
        h[k++] = *it;
    }
    h.resize(k - 1);  // last point repeats the first

    // Collinear input collapses both chains onto one segment.
    if (h.size() == 2 && h[0] == h[1]) h.resize(1);
    hull.vertices = std::move(h);
    return hull;
}

double polygon_area(const Polygon2& poly) {
    const auto& v = poly.vertices;
    if (v.size() < 3) return 0.0;
    double twice = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        const auto& a = v[i];
        const auto& b = v[(i + 1) % v.size()];
        twice += a.x() * b.y() - b.x() * a.y();
    }
    return 0.5 * twice;
}

namespace {

// Keeps the half plane where edge(p) >= 0.
template <typename EdgeFn>
void clip_against(std::vector<Eigen::Vector2d>& verts, EdgeFn inside_dist) {
    if (verts.empty()) return;
    std::vector<Eigen::Vector2d> out;
    out.reserve(verts.size() + 4);
    for (size_t i = 0; i < verts.size(); ++i) {
        const Eigen::Vector2d& cur = verts[i];
        const Eigen::Vector2d& nxt = verts[(i + 1) % verts.size()];
        const double dc = inside_dist(cur);
        const double dn = inside_dist(nxt);
        if (dc >= 0) out.push_back(cur);
        if ((dc >= 0) != (dn >= 0)) {
            const double t = dc / (dc - dn);
            out.push_back(cur + t * (nxt - cur));
        }
    }
    verts = std::move(out);
}

}  // namespace

Polygon2 clip_polygon_to_rect(const Polygon2& poly, double w, double h) {
    std::vector<Eigen::Vector2d> v = poly.vertices;
    clip_against(v, [](const Eigen::Vector2d& p) { return p.x(); });
    clip_against(v, [w](const Eigen::Vector2d& p) { return w - p.x(); });
    clip_against(v, [](const Eigen::Vector2d& p) { return p.y(); });
    clip_against(v, [h](const Eigen::Vector2d& p) { return h - p.y(); });
    Polygon2 out;
    out.vertices = std::move(v);
    return out;
}

bool point_in_convex_polygon(const Polygon2& poly, const Eigen::Vector2d& p,
                             double eps) {
    const auto& v = poly.vertices;
    if (v.size() < 3) return false;
    for (size_t i = 0; i < v.size(); ++i) {
        if (cross2(v[i], v[(i + 1) % v.size()], p) < -eps) return false;
    }
    return true;
}

Aabb3 cell_airspace_box(std::span<const Eigen::Vector3d> points, double ground_y,
                        const GroundRect& rect) {
    if (points.empty())
        throw GeometryError("airspace box needs at least one point");
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& p : points) top = std::max(top, p.y());
    // A flat box (top == ground) is degenerate but projectable; only a top
    // strictly below the ground plane is inverted.
    if (top < ground_y)
        throw GeometryError("inverted airspace box: highest point (" +
                            std::to_string(top) + ") lies below the ground plane (" +
                            std::to_string(ground_y) + ")");
    Aabb3 box;
    box.min = Eigen::Vector3d(rect.min_x, ground_y, rect.min_z);
    box.max = Eigen::Vector3d(rect.max_x, top, rect.max_z);
    return box;
}

Polygon2 project_box_hull(const CameraView& camera, const Aabb3& box) {
    // Box corners in camera space.
    std::array<Eigen::Vector3d, 8> corners;
    int idx = 0;
    for (int ix = 0; ix < 2; ++ix)
        for (int iy = 0; iy < 2; ++iy)
            for (int iz = 0; iz < 2; ++iz) {
                const Eigen::Vector3d world(ix ? box.max.x() : box.min.x(),
                                            iy ? box.max.y() : box.min.y(),
                                            iz ? box.max.z() : box.min.z());
                corners[idx++] = camera.rotation * world + camera.translation;
            }

    static constexpr int kEdges[12][2] = {{0, 1}, {0, 2}, {0, 4}, {1, 3},
                                          {1, 5}, {2, 3}, {2, 6}, {3, 7},
                                          {4, 5}, {4, 6}, {5, 7}, {6, 7}};

    // Clip the solid against the near plane: extreme points of the clipped
    // box are the in-front corners plus edge crossings of z = eps.
    std::vector<Eigen::Vector3d> front;
    front.reserve(16);
    for (const auto& c : corners)
        if (c.z() > kDepthEpsilon) front.push_back(c);
    for (const auto& e : kEdges) {
        const auto& a = corners[e[0]];
        const auto& b = corners[e[1]];
        const bool fa = a.z() > kDepthEpsilon;
        const bool fb = b.z() > kDepthEpsilon;
        if (fa != fb) {
            const double t = (kDepthEpsilon - a.z()) / (b.z() - a.z());
            front.push_back(a + t * (b - a));
        }
    }

    std::vector<Eigen::Vector2d> projected;
    projected.reserve(front.size());
    for (const auto& pc : front) {
        const double z = std::max(pc.z(), kDepthEpsilon);
        projected.emplace_back(camera.fx * pc.x() / z + camera.cx,
                               camera.fy * pc.y() / z + camera.cy);
    }
    return convex_hull(projected);
}

}  // namespace cellsplat
