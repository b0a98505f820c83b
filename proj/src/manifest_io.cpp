// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/manifest_io.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "cellsplat/colmap_io.hpp"
#include "cellsplat/error.hpp"

namespace cellsplat {

using nlohmann::json;

namespace {

json rect_to_json(const GroundRect& r) {
    return {{"min_x", r.min_x}, {"max_x", r.max_x}, {"min_z", r.min_z}, {"max_z", r.max_z}};
}

GroundRect rect_from_json(const json& j) {
    GroundRect r;
    r.min_x = j.at("min_x").get<double>();
    r.max_x = j.at("max_x").get<double>();
    r.min_z = j.at("min_z").get<double>();
    r.max_z = j.at("max_z").get<double>();
    return r;
}

}  // namespace

std::filesystem::path write_cell_dataset(const CellDataset& cell,
                                         const std::filesystem::path& dir,
                                         const ArtifactMap& artifacts) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create cell directory " + dir.string());

    json log = json::array();
    for (const auto& rec : cell.selection_log) {
        json entry = {{"camera_id", rec.camera_id}, {"reason", to_string(rec.reason)}};
        if (std::isnan(rec.visibility))
            entry["visibility"] = nullptr;
        else
            entry["visibility"] = rec.visibility;
        log.push_back(std::move(entry));
    }

    json j = {
        {"version", 1},
        {"cell",
         {{"row", cell.spec.row},
          {"col", cell.spec.col},
          {"grid_rows", cell.spec.grid_rows},
          {"grid_cols", cell.spec.grid_cols}}},
        {"original", rect_to_json(cell.spec.original)},
        {"expanded", rect_to_json(cell.spec.expanded)},
        {"camera_ids", cell.camera_ids},
        {"point_ids", cell.point_ids},
        {"selection_log", std::move(log)},
        {"artifacts", artifacts},
    };

    const auto path = dir / "manifest.json";
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f << j.dump(2) << '\n';
    if (!f) throw IoError("short write to " + path.string());
    return path;
}

CellDataset load_cell_dataset(const std::filesystem::path& dir, ArtifactMap* artifacts) {
    const auto path =
        std::filesystem::is_directory(dir) ? dir / "manifest.json" : dir;
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": invalid JSON: " + e.what());
    }

    try {
        const int version = j.at("version").get<int>();
        if (version != 1)
            throw SchemaError(path.string() + ": unsupported manifest version " +
                              std::to_string(version));
        CellDataset cell;
        const auto& c = j.at("cell");
        cell.spec.row = c.at("row").get<int>();
        cell.spec.col = c.at("col").get<int>();
        cell.spec.grid_rows = c.at("grid_rows").get<int>();
        cell.spec.grid_cols = c.at("grid_cols").get<int>();
        cell.spec.original = rect_from_json(j.at("original"));
        cell.spec.expanded = rect_from_json(j.at("expanded"));
        cell.camera_ids = j.at("camera_ids").get<std::vector<int64_t>>();
        cell.point_ids = j.at("point_ids").get<std::vector<int64_t>>();
        for (const auto& entry : j.at("selection_log")) {
            SelectionRecord rec;
            rec.camera_id = entry.at("camera_id").get<int64_t>();
            rec.reason = selection_reason_from_string(entry.at("reason").get<std::string>());
            const auto& vis = entry.at("visibility");
            rec.visibility = vis.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                           : vis.get<double>();
            cell.selection_log.push_back(rec);
        }
        if (artifacts && j.contains("artifacts"))
            *artifacts = j.at("artifacts").get<ArtifactMap>();
        return cell;
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": malformed manifest: " + e.what());
    }
}

void validate_cell_against_bundle(const CellDataset& cell, const SceneBundle& bundle) {
    std::unordered_set<int64_t> cams, pts;
    for (const auto& c : bundle.cameras) cams.insert(c.id);
    for (const auto& p : bundle.points) pts.insert(p.id);
    for (int64_t id : cell.camera_ids)
        if (!cams.count(id))
            throw SchemaError("manifest references unknown camera id " +
                              std::to_string(id));
    for (int64_t id : cell.point_ids)
        if (!pts.count(id))
            throw SchemaError("manifest references unknown point id " +
                              std::to_string(id));
}

SceneBundle cell_sub_bundle(const CellDataset& cell, const SceneBundle& bundle) {
    validate_cell_against_bundle(cell, bundle);
    std::unordered_set<int64_t> cam_set(cell.camera_ids.begin(), cell.camera_ids.end());
    std::unordered_set<int64_t> pt_set(cell.point_ids.begin(), cell.point_ids.end());

    SceneBundle sub;
    sub.world_rotation = bundle.world_rotation;
    for (const auto& cam : bundle.cameras)
        if (cam_set.count(cam.id)) sub.cameras.push_back(cam);
    for (const auto& pt : bundle.points) {
        if (!pt_set.count(pt.id)) continue;
        SparsePoint copy = pt;
        std::erase_if(copy.track, [&](int64_t id) { return !cam_set.count(id); });
        sub.points.push_back(std::move(copy));
    }
    return sub;
}

std::filesystem::path export_cell_dir(const SceneBundle& bundle, const CellDataset& cell,
                                      const std::filesystem::path& dir) {
    const SceneBundle sub = cell_sub_bundle(cell, bundle);
    write_colmap_sparse(sub, dir / "sparse", ColmapFormat::kBinary);
    return write_cell_dataset(cell, dir, {{"sparse", "sparse"}});
}

CellDirData load_cell_dir(const std::filesystem::path& dir) {
    ArtifactMap artifacts;
    CellDirData out;
    out.dataset = load_cell_dataset(dir, &artifacts);
    const auto it = artifacts.find("sparse");
    if (it == artifacts.end())
        throw SchemaError(dir.string() + ": manifest lists no 'sparse' artifact");
    out.bundle = load_colmap_sparse(dir / it->second);
    validate_cell_against_bundle(out.dataset, out.bundle);
    return out;
}

}  // namespace cellsplat
