// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "cellsplat/error.hpp"
#include "cellsplat/geometry.hpp"

namespace cellsplat {

using nlohmann::json;

namespace {

struct GroundPos {
    double x = 0, z = 0;
    size_t index = 0;  // into bundle.cameras
};

// Quantile group sizes: first (n % k) groups take the extra camera.
std::vector<size_t> group_sizes(size_t n, int k) {
    std::vector<size_t> sizes(k, n / k);
    for (size_t i = 0; i < n % k; ++i) ++sizes[i];
    return sizes;
}

// Boundaries between consecutive sorted groups: midpoint of the adjacent
// extreme coordinates; outermost boundaries are the global extremes.
std::vector<double> split_boundaries(const std::vector<double>& sorted_coords,
                                     const std::vector<size_t>& sizes) {
    std::vector<double> bounds;
    bounds.push_back(sorted_coords.front());
    size_t cursor = 0;
    for (size_t g = 0; g + 1 < sizes.size(); ++g) {
        cursor += sizes[g];
        bounds.push_back(0.5 * (sorted_coords[cursor - 1] + sorted_coords[cursor]));
    }
    bounds.push_back(sorted_coords.back());
    return bounds;
}

}  // namespace

std::vector<CellSpec> divide_regions(const SceneBundle& bundle, int rows, int cols) {
    if (rows < 1 || cols < 1) throw ConfigError("grid dimensions must be >= 1");
    const size_t n = bundle.cameras.size();
    if (n < static_cast<size_t>(rows) * static_cast<size_t>(cols))
        throw GeometryError("cannot divide " + std::to_string(n) + " cameras into a " +
                            std::to_string(rows) + "x" + std::to_string(cols) + " grid");

    std::vector<GroundPos> pos(n);
    for (size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d c = bundle.cameras[i].center();
        pos[i] = {c.x(), c.z(), i};
    }

    double min_z = pos[0].z, max_z = pos[0].z;
    for (const auto& p : pos) {
        min_z = std::min(min_z, p.z);
        max_z = std::max(max_z, p.z);
    }

    std::sort(pos.begin(), pos.end(), [](const GroundPos& a, const GroundPos& b) {
        if (a.x != b.x) return a.x < b.x;
        return a.index < b.index;
    });
    std::vector<double> xs(n);
    for (size_t i = 0; i < n; ++i) xs[i] = pos[i].x;
    const auto row_sizes = group_sizes(n, rows);
    const auto x_bounds = split_boundaries(xs, row_sizes);

    std::vector<CellSpec> cells;
    cells.reserve(static_cast<size_t>(rows) * cols);
    size_t cursor = 0;
    for (int r = 0; r < rows; ++r) {
        std::vector<GroundPos> section(pos.begin() + cursor,
                                       pos.begin() + cursor + row_sizes[r]);
        cursor += row_sizes[r];
        std::sort(section.begin(), section.end(),
                  [](const GroundPos& a, const GroundPos& b) {
                      if (a.z != b.z) return a.z < b.z;
                      return a.index < b.index;
                  });
        std::vector<double> zs(section.size());
        for (size_t i = 0; i < section.size(); ++i) zs[i] = section[i].z;
        auto z_bounds = split_boundaries(zs, group_sizes(section.size(), cols));
        // Each section's cells span the global z range so the grid tiles the
        // camera bounding rect.
        z_bounds.front() = min_z;
        z_bounds.back() = max_z;

        for (int c = 0; c < cols; ++c) {
            CellSpec spec;
            spec.row = r;
            spec.col = c;
            spec.grid_rows = rows;
            spec.grid_cols = cols;
            spec.original = {x_bounds[r], x_bounds[r + 1], z_bounds[c], z_bounds[c + 1]};
            spec.expanded = spec.original;
            cells.push_back(spec);
        }
    }
    return cells;
}

CellSpec expand_cell(const CellSpec& spec, double ratio) {
    if (ratio < 0.0) throw ConfigError("expansion ratio must be non-negative");
    const double half_dx = 0.5 * ratio * spec.original.width();
    const double half_dz = 0.5 * ratio * spec.original.depth();
    CellSpec out = spec;
    out.expanded = {spec.original.min_x - half_dx, spec.original.max_x + half_dx,
                    spec.original.min_z - half_dz, spec.original.max_z + half_dz};
    return out;
}

CellDataset position_select(const SceneBundle& bundle, const CellSpec& spec) {
    CellDataset cell;
    cell.spec = spec;
    for (const auto& cam : bundle.cameras) {
        const Eigen::Vector3d c = cam.center();
        if (spec.expanded.contains(c.x(), c.z())) {
            cell.camera_ids.push_back(cam.id);
            cell.selection_log.push_back(
                {cam.id, std::numeric_limits<double>::quiet_NaN(),
                 SelectionReason::kPosition});
        }
    }
    for (const auto& pt : bundle.points)
        if (spec.expanded.contains(pt.position.x(), pt.position.z()))
            cell.point_ids.push_back(pt.id);
    std::sort(cell.camera_ids.begin(), cell.camera_ids.end());
    std::sort(cell.point_ids.begin(), cell.point_ids.end());
    return cell;
}

double visibility(const CameraView& camera, std::span<const Eigen::Vector3d> cell_points,
                  const GroundRect& footprint, double ground_y, VisibilityMode mode,
                  bool clip_to_image) {
    if (cell_points.empty())
        throw GeometryError("visibility needs at least one cell point");

    Polygon2 hull;
    if (mode == VisibilityMode::kAirspaceAware) {
        const Aabb3 box = cell_airspace_box(cell_points, ground_y, footprint);
        hull = project_box_hull(camera, box);
    } else {
        std::vector<Eigen::Vector2d> projected;
        projected.reserve(cell_points.size());
        for (const auto& p : cell_points)
            if (const auto uv = project_point(camera, p)) projected.push_back(*uv);
        hull = convex_hull(projected);
    }

    const double image_area = static_cast<double>(camera.width) * camera.height;
    const Polygon2 measured =
        clip_to_image ? clip_polygon_to_rect(hull, camera.width, camera.height) : hull;
    return polygon_area(measured) / image_area;
}

void visibility_camera_select(const SceneBundle& bundle, CellDataset& cell,
                              const PartitionConfig& config, double ground_y) {
    if (cell.point_ids.empty()) return;  // no geometry to measure against

    std::vector<Eigen::Vector3d> cell_points;
    {
        std::unordered_set<int64_t> ids(cell.point_ids.begin(), cell.point_ids.end());
        cell_points.reserve(cell.point_ids.size());
        for (const auto& pt : bundle.points)
            if (ids.count(pt.id)) cell_points.push_back(pt.position);
    }

    std::unordered_set<int64_t> selected(cell.camera_ids.begin(), cell.camera_ids.end());
    std::vector<size_t> candidates;
    for (size_t i = 0; i < bundle.cameras.size(); ++i)
        if (!selected.count(bundle.cameras[i].id)) candidates.push_back(i);

    std::vector<double> values(candidates.size());
    const int64_t m = static_cast<int64_t>(candidates.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8)
    for (int64_t k = 0; k < m; ++k) {
        try {
            values[k] = visibility(bundle.cameras[candidates[k]], cell_points,
                                   cell.spec.expanded, ground_y,
                                   config.visibility_mode, config.clip_to_image);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    for (size_t k = 0; k < candidates.size(); ++k) {
        const auto& cam = bundle.cameras[candidates[k]];
        if (values[k] > config.visibility_threshold) {
            cell.camera_ids.push_back(cam.id);
            cell.selection_log.push_back({cam.id, values[k], SelectionReason::kVisibility});
        } else {
            cell.selection_log.push_back({cam.id, values[k], SelectionReason::kRejected});
        }
    }
    std::sort(cell.camera_ids.begin(), cell.camera_ids.end());
    std::sort(cell.selection_log.begin(), cell.selection_log.end(),
              [](const SelectionRecord& a, const SelectionRecord& b) {
                  return a.camera_id < b.camera_id;
              });
}

void coverage_point_select(const SceneBundle& bundle, CellDataset& cell) {
    const std::unordered_set<int64_t> cams(cell.camera_ids.begin(), cell.camera_ids.end());
    std::unordered_set<int64_t> have(cell.point_ids.begin(), cell.point_ids.end());
    for (const auto& pt : bundle.points) {
        if (have.count(pt.id)) continue;
        for (int64_t cam_id : pt.track) {
            if (cams.count(cam_id)) {
                cell.point_ids.push_back(pt.id);
                break;
            }
        }
    }
    std::sort(cell.point_ids.begin(), cell.point_ids.end());
}

double scene_ground_y(const SceneBundle& bundle, double percentile) {
    if (bundle.points.empty()) return 0.0;
    std::vector<double> ys;
    ys.reserve(bundle.points.size());
    for (const auto& pt : bundle.points) ys.push_back(pt.position.y());
    const auto idx = static_cast<size_t>(
        std::llround(percentile * static_cast<double>(ys.size() - 1)));
    std::nth_element(ys.begin(), ys.begin() + idx, ys.end());
    return ys[idx];
}

PartitionResult partition_scene(const SceneBundle& bundle, const PartitionConfig& config) {
    config.validate();
    PartitionResult result;
    result.config = config;
    result.ground_y = std::isnan(config.ground_y)
                          ? scene_ground_y(bundle, config.ground_percentile)
                          : config.ground_y;

    auto specs = divide_regions(bundle, config.grid_rows, config.grid_cols);
    result.cells.reserve(specs.size());
    for (auto& spec : specs) {
        const CellSpec expanded = expand_cell(spec, config.expansion_ratio);
        CellDataset cell = position_select(bundle, expanded);
        visibility_camera_select(bundle, cell, config, result.ground_y);
        coverage_point_select(bundle, cell);
        result.cells.push_back(std::move(cell));
    }
    return result;
}

namespace {

json rect_json(const GroundRect& r) {
    return {{"min_x", r.min_x}, {"max_x", r.max_x}, {"min_z", r.min_z}, {"max_z", r.max_z}};
}

constexpr int kHistogramBins = 10;

json summary_document(const PartitionResult& result, const SceneBundle& bundle) {
    std::unordered_map<int64_t, const CameraView*> cam_by_id;
    for (const auto& cam : bundle.cameras) cam_by_id[cam.id] = &cam;

    json cells = json::array();
    for (const auto& cell : result.cells) {
        std::array<int, kHistogramBins> hist{};
        int n_position = 0, n_visibility = 0;
        json cameras = json::array();
        for (const auto& rec : cell.selection_log) {
            if (!std::isnan(rec.visibility)) {
                const int bin = std::clamp(static_cast<int>(rec.visibility * kHistogramBins),
                                           0, kHistogramBins - 1);
                ++hist[bin];
            }
            if (rec.reason == SelectionReason::kPosition) ++n_position;
            if (rec.reason == SelectionReason::kVisibility) ++n_visibility;
            if (rec.reason == SelectionReason::kRejected) continue;
            json cam = {{"id", rec.camera_id}, {"reason", to_string(rec.reason)}};
            if (std::isnan(rec.visibility))
                cam["visibility"] = nullptr;
            else
                cam["visibility"] = rec.visibility;
            if (const auto it = cam_by_id.find(rec.camera_id); it != cam_by_id.end()) {
                const Eigen::Vector3d c = it->second->center();
                cam["ground"] = {c.x(), c.z()};
            }
            cameras.push_back(std::move(cam));
        }
        cells.push_back({{"row", cell.spec.row},
                         {"col", cell.spec.col},
                         {"original", rect_json(cell.spec.original)},
                         {"expanded", rect_json(cell.spec.expanded)},
                         {"position_cameras", n_position},
                         {"visibility_cameras", n_visibility},
                         {"cameras_total", cell.camera_ids.size()},
                         {"points_total", cell.point_ids.size()},
                         {"visibility_histogram", hist},
                         {"cameras", std::move(cameras)}});
    }

    json all_cameras = json::array();
    for (const auto& cam : bundle.cameras) {
        const Eigen::Vector3d c = cam.center();
        all_cameras.push_back({{"id", cam.id}, {"ground", {c.x(), c.z()}}});
    }

    return {{"version", 1},
            {"grid", {{"rows", result.config.grid_rows}, {"cols", result.config.grid_cols}}},
            {"expansion_ratio", result.config.expansion_ratio},
            {"visibility_threshold", result.config.visibility_threshold},
            {"visibility_mode", to_string(result.config.visibility_mode)},
            {"clip_to_image", result.config.clip_to_image},
            {"ground_y", result.ground_y},
            {"cameras", std::move(all_cameras)},
            {"cells", std::move(cells)}};
}

}  // namespace

std::string partition_summary_json(const PartitionResult& result,
                                   const SceneBundle& bundle) {
    return summary_document(result, bundle).dump(2) + "\n";
}

namespace {

struct SvgMapper {
    double min_x, min_z, scale, margin;
    double x(double wx) const { return margin + (wx - min_x) * scale; }
    // z grows upward in the diagram
    double y(double wz, double max_z) const { return margin + (max_z - wz) * scale; }
};

std::string render_layout_svg(const json& summary) {
    double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
    double min_z = min_x, max_z = -min_x;
    const auto grow = [&](const json& rect) {
        min_x = std::min(min_x, rect.at("min_x").get<double>());
        max_x = std::max(max_x, rect.at("max_x").get<double>());
        min_z = std::min(min_z, rect.at("min_z").get<double>());
        max_z = std::max(max_z, rect.at("max_z").get<double>());
    };
    for (const auto& cell : summary.at("cells")) grow(cell.at("expanded"));
    for (const auto& cam : summary.at("cameras")) {
        min_x = std::min(min_x, cam.at("ground")[0].get<double>());
        max_x = std::max(max_x, cam.at("ground")[0].get<double>());
        min_z = std::min(min_z, cam.at("ground")[1].get<double>());
        max_z = std::max(max_z, cam.at("ground")[1].get<double>());
    }
    if (!std::isfinite(min_x)) { min_x = min_z = 0; max_x = max_z = 1; }

    const double span = std::max({max_x - min_x, max_z - min_z, 1e-9});
    const double margin = 40.0;
    const double scale = 720.0 / span;
    const double width = (max_x - min_x) * scale + 2 * margin;
    const double height = (max_z - min_z) * scale + 2 * margin;
    const SvgMapper m{min_x, min_z, scale, margin};

    std::ostringstream svg;
    svg.precision(6);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
        << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (const auto& cell : summary.at("cells")) {
        const auto& e = cell.at("expanded");
        svg << "<rect x=\"" << m.x(e.at("min_x").get<double>()) << "\" y=\""
            << m.y(e.at("max_z").get<double>(), max_z) << "\" width=\""
            << (e.at("max_x").get<double>() - e.at("min_x").get<double>()) * scale
            << "\" height=\""
            << (e.at("max_z").get<double>() - e.at("min_z").get<double>()) * scale
            << "\" fill=\"none\" stroke=\"#999\" stroke-dasharray=\"6 4\"/>\n";
        const auto& o = cell.at("original");
        svg << "<rect x=\"" << m.x(o.at("min_x").get<double>()) << "\" y=\""
            << m.y(o.at("max_z").get<double>(), max_z) << "\" width=\""
            << (o.at("max_x").get<double>() - o.at("min_x").get<double>()) * scale
            << "\" height=\""
            << (o.at("max_z").get<double>() - o.at("min_z").get<double>()) * scale
            << "\" fill=\"none\" stroke=\"#222\"/>\n";
        svg << "<text x=\"" << m.x(o.at("min_x").get<double>()) + 4 << "\" y=\""
            << m.y(o.at("max_z").get<double>(), max_z) + 14
            << "\" font-size=\"12\" fill=\"#222\">cell " << cell.at("row") << ','
            << cell.at("col") << "</text>\n";
    }

    // position-selected anywhere -> blue; visibility-only -> orange;
    // unselected -> gray
    std::unordered_map<int64_t, int> role;  // 0 unseen, 1 visibility, 2 position
    for (const auto& cell : summary.at("cells")) {
        for (const auto& cam : cell.at("cameras")) {
            const int64_t id = cam.at("id").get<int64_t>();
            const int r = cam.at("reason").get<std::string>() == "position" ? 2 : 1;
            role[id] = std::max(role[id], r);
        }
    }
    for (const auto& cam : summary.at("cameras")) {
        const int64_t id = cam.at("id").get<int64_t>();
        const char* color = "#bbbbbb";
        if (const auto it = role.find(id); it != role.end())
            color = it->second == 2 ? "#3a6ea5" : "#e08020";
        svg << "<circle cx=\"" << m.x(cam.at("ground")[0].get<double>()) << "\" cy=\""
            << m.y(cam.at("ground")[1].get<double>(), max_z)
            << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }

    svg << "<text x=\"8\" y=\"16\" font-size=\"12\" fill=\"#3a6ea5\">"
        << "&#9679; position-selected</text>\n";
    svg << "<text x=\"8\" y=\"32\" font-size=\"12\" fill=\"#e08020\">"
        << "&#9679; visibility-selected</text>\n";
    svg << "<text x=\"8\" y=\"48\" font-size=\"12\" fill=\"#bbbbbb\">"
        << "&#9679; unselected</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace

std::string partition_layout_svg(const PartitionResult& result,
                                 const SceneBundle& bundle) {
    return render_layout_svg(summary_document(result, bundle));
}

std::string partition_layout_svg_from_summary(const std::string& summary_json) {
    json summary;
    try {
        summary = json::parse(summary_json);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("invalid summary JSON: ") + e.what());
    }
    try {
        return render_layout_svg(summary);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("summary JSON missing fields: ") + e.what());
    }
}

}  // namespace cellsplat
