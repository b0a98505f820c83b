// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/merge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

#include "cellsplat/error.hpp"

namespace cellsplat {

namespace {

GaussianModel cull_rows(const GaussianModel& model,
                        const std::vector<int64_t>& keep) {
    GaussianModel out;
    out.count = static_cast<int64_t>(keep.size());
    out.positions.reserve(keep.size() * 3);
    out.sh_dc.reserve(keep.size() * 3);
    out.sh_rest.reserve(keep.size() * 45);
    out.opacity.reserve(keep.size());
    out.scales.reserve(keep.size() * 3);
    out.rotations.reserve(keep.size() * 4);
    for (int64_t i : keep) {
        for (int k = 0; k < 3; ++k) out.positions.push_back(model.positions[i * 3 + k]);
        for (int k = 0; k < 3; ++k) out.sh_dc.push_back(model.sh_dc[i * 3 + k]);
        for (int k = 0; k < 45; ++k) out.sh_rest.push_back(model.sh_rest[i * 45 + k]);
        out.opacity.push_back(model.opacity[i]);
        for (int k = 0; k < 3; ++k) out.scales.push_back(model.scales[i * 3 + k]);
        for (int k = 0; k < 4; ++k) out.rotations.push_back(model.rotations[i * 4 + k]);
    }
    return out;
}

template <typename Contains>
GaussianModel cull_with(const GaussianModel& model, Contains&& contains) {
    std::vector<int64_t> keep;
    keep.reserve(model.count);
    for (int64_t i = 0; i < model.count; ++i) {
        const double x = model.positions[i * 3 + 0];
        const double z = model.positions[i * 3 + 2];
        if (contains(x, z)) keep.push_back(i);
    }
    return cull_rows(model, keep);
}

}  // namespace

GaussianModel cull_outside(const GaussianModel& model, const GroundRect& original) {
    return cull_with(model, [&](double x, double z) { return original.contains(x, z); });
}

GaussianModel cull_outside(const GaussianModel& model, const CellSpec& spec) {
    return cull_with(model,
                     [&](double x, double z) { return spec.original_contains(x, z); });
}

GaussianModel merge_cells(std::span<const CellModel> cells) {
    std::vector<size_t> order(cells.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (cells[a].spec.row != cells[b].spec.row)
            return cells[a].spec.row < cells[b].spec.row;
        return cells[a].spec.col < cells[b].spec.col;
    });

    for (size_t i = 0; i < cells.size(); ++i) {
        for (size_t j = i + 1; j < cells.size(); ++j) {
            const GroundRect& a = cells[i].spec.original;
            const GroundRect& b = cells[j].spec.original;
            const bool overlap_x = std::max(a.min_x, b.min_x) < std::min(a.max_x, b.max_x);
            const bool overlap_z = std::max(a.min_z, b.min_z) < std::min(a.max_z, b.max_z);
            if (overlap_x && overlap_z)
                throw GeometryError("cells (" + std::to_string(cells[i].spec.row) + "," +
                                    std::to_string(cells[i].spec.col) + ") and (" +
                                    std::to_string(cells[j].spec.row) + "," +
                                    std::to_string(cells[j].spec.col) +
                                    ") have overlapping original rects");
        }
    }

    GaussianModel merged;
    for (size_t k : order) {
        const GaussianModel culled = cull_outside(cells[k].model, cells[k].spec);
        merged.count += culled.count;
        merged.positions.insert(merged.positions.end(), culled.positions.begin(),
                                culled.positions.end());
        merged.sh_dc.insert(merged.sh_dc.end(), culled.sh_dc.begin(),
                            culled.sh_dc.end());
        merged.sh_rest.insert(merged.sh_rest.end(), culled.sh_rest.begin(),
                              culled.sh_rest.end());
        merged.opacity.insert(merged.opacity.end(), culled.opacity.begin(),
                              culled.opacity.end());
        merged.scales.insert(merged.scales.end(), culled.scales.begin(),
                             culled.scales.end());
        merged.rotations.insert(merged.rotations.end(), culled.rotations.begin(),
                                culled.rotations.end());
    }
    return merged;
}

std::vector<SeamBoundary> seam_report(const GaussianModel& merged,
                                      std::span<const CellSpec> specs,
                                      double strip_fraction) {
    if (merged.count == 0 || specs.empty()) return {};

    double scene_min_z = std::numeric_limits<double>::infinity();
    double scene_max_z = -scene_min_z;
    for (const auto& s : specs) {
        scene_min_z = std::min(scene_min_z, s.original.min_z);
        scene_max_z = std::max(scene_max_z, s.original.max_z);
    }

    std::vector<SeamBoundary> out;

    // Vertical boundaries between adjacent x sections (shared by all rows).
    std::map<int, std::pair<double, double>> row_x;  // row -> (min_x, max_x, width)
    std::map<int, double> row_width;
    for (const auto& s : specs) {
        row_x[s.row] = {s.original.min_x, s.original.max_x};
        row_width[s.row] = s.original.width();
    }
    for (auto it = row_x.begin(); it != row_x.end(); ++it) {
        const auto next = std::next(it);
        if (next == row_x.end()) break;
        SeamBoundary b;
        b.axis = 'x';
        b.coordinate = it->second.second;
        b.span_min = scene_min_z;
        b.span_max = scene_max_z;
        b.strip_width =
            strip_fraction * std::min(row_width[it->first], row_width[next->first]);
        out.push_back(b);
    }

    // Horizontal boundaries between vertically adjacent cells in one section.
    std::map<std::pair<int, int>, const CellSpec*> by_index;
    for (const auto& s : specs) by_index[{s.row, s.col}] = &s;
    for (const auto& [key, spec] : by_index) {
        const auto next = by_index.find({key.first, key.second + 1});
        if (next == by_index.end()) continue;
        SeamBoundary b;
        b.axis = 'z';
        b.coordinate = spec->original.max_z;
        b.span_min = spec->original.min_x;
        b.span_max = spec->original.max_x;
        b.strip_width = strip_fraction *
                        std::min(spec->original.depth(), next->second->original.depth());
        out.push_back(b);
    }

    for (auto& b : out) {
        for (int64_t i = 0; i < merged.count; ++i) {
            const double x = merged.positions[i * 3 + 0];
            const double z = merged.positions[i * 3 + 2];
            const double along = b.axis == 'x' ? z : x;
            const double across = b.axis == 'x' ? x : z;
            if (along < b.span_min || along >= b.span_max) continue;
            if (across >= b.coordinate - b.strip_width && across < b.coordinate)
                ++b.lower_count;
            else if (across >= b.coordinate && across < b.coordinate + b.strip_width)
                ++b.upper_count;
        }
        const double strip_area = b.strip_width * (b.span_max - b.span_min);
        b.lower_density = strip_area > 0 ? b.lower_count / strip_area : 0.0;
        b.upper_density = strip_area > 0 ? b.upper_count / strip_area : 0.0;
        if (b.lower_count == 0 && b.upper_count == 0)
            b.ratio = 1.0;
        else if (b.upper_density == 0.0)
            b.ratio = std::numeric_limits<double>::infinity();
        else
            b.ratio = b.lower_density / b.upper_density;
    }
    return out;
}

std::string seam_report_json(std::span<const SeamBoundary> report) {
    nlohmann::json boundaries = nlohmann::json::array();
    for (const auto& b : report) {
        nlohmann::json j = {{"axis", std::string(1, b.axis)},
                            {"coordinate", b.coordinate},
                            {"span_min", b.span_min},
                            {"span_max", b.span_max},
                            {"strip_width", b.strip_width},
                            {"lower_count", b.lower_count},
                            {"upper_count", b.upper_count},
                            {"lower_density", b.lower_density},
                            {"upper_density", b.upper_density}};
        if (std::isinf(b.ratio))
            j["ratio"] = nullptr;
        else
            j["ratio"] = b.ratio;
        boundaries.push_back(std::move(j));
    }
    nlohmann::json doc = {{"version", 1}, {"boundaries", std::move(boundaries)}};
    return doc.dump(2) + "\n";
}

}  // namespace cellsplat
