// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/types.hpp"

#include <unordered_set>

#include "cellsplat/error.hpp"

namespace cellsplat {

void validate_bundle(const SceneBundle& bundle, bool require_nonempty_tracks) {
    std::unordered_set<int64_t> camera_ids;
    for (const auto& cam : bundle.cameras) {
        if (!camera_ids.insert(cam.id).second)
            throw SchemaError("duplicate camera id " + std::to_string(cam.id));
        if (cam.width <= 0 || cam.height <= 0)
            throw SchemaError("camera " + std::to_string(cam.id) +
                              " has non-positive image size");
        if (cam.fx <= 0.0 || cam.fy <= 0.0)
            throw SchemaError("camera " + std::to_string(cam.id) +
                              " has non-positive focal length");
        if (std::abs(cam.rotation.norm() - 1.0) > 1e-9)
            throw SchemaError("camera " + std::to_string(cam.id) +
                              " quaternion is not unit norm");
    }
    std::unordered_set<int64_t> point_ids;
    for (const auto& pt : bundle.points) {
        if (!point_ids.insert(pt.id).second)
            throw SchemaError("duplicate point id " + std::to_string(pt.id));
        if (require_nonempty_tracks && pt.track.empty())
            throw SchemaError("point " + std::to_string(pt.id) + " has an empty track");
        for (int64_t cam_id : pt.track)
            if (!camera_ids.count(cam_id))
                throw SchemaError("point " + std::to_string(pt.id) +
                                  " track references unknown camera " +
                                  std::to_string(cam_id));
    }
    const Eigen::Matrix3d g =
        bundle.world_rotation * bundle.world_rotation.transpose();
    if ((g - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9)
        throw SchemaError("world_rotation is not orthonormal");
}

namespace {

void check_attr(const std::vector<float>& v, int64_t count, int64_t stride,
                const char* name) {
    if (static_cast<int64_t>(v.size()) != count * stride)
        throw SchemaError(std::string("gaussian attribute '") + name +
                          "' has wrong length: " + std::to_string(v.size()) +
                          " expected " + std::to_string(count * stride));
    for (float x : v)
        if (!std::isfinite(x))
            throw SchemaError(std::string("gaussian attribute '") + name +
                              "' contains a non-finite value");
}

}  // namespace

void validate_gaussians(const GaussianModel& model) {
    check_attr(model.positions, model.count, 3, "positions");
    check_attr(model.sh_dc, model.count, 3, "sh_dc");
    check_attr(model.sh_rest, model.count, 45, "sh_rest");
    check_attr(model.opacity, model.count, 1, "opacity");
    check_attr(model.scales, model.count, 3, "scales");
    check_attr(model.rotations, model.count, 4, "rotations");
}

const char* to_string(SelectionReason r) {
    switch (r) {
        case SelectionReason::kPosition: return "position";
        case SelectionReason::kVisibility: return "visibility";
        case SelectionReason::kRejected: return "rejected";
    }
    return "unknown";
}

SelectionReason selection_reason_from_string(const std::string& s) {
    if (s == "position") return SelectionReason::kPosition;
    if (s == "visibility") return SelectionReason::kVisibility;
    if (s == "rejected") return SelectionReason::kRejected;
    throw SchemaError("unknown selection reason '" + s + "'");
}

const char* to_string(VisibilityMode m) {
    return m == VisibilityMode::kAirspaceAware ? "airspace_aware" : "airspace_agnostic";
}

void PartitionConfig::validate() const {
    if (grid_rows < 1 || grid_cols < 1)
        throw ConfigError("grid dimensions must be >= 1");
    if (visibility_threshold < 0.0 || visibility_threshold > 1.0)
        throw ConfigError("visibility threshold must lie in [0, 1]");
    if (expansion_ratio < 0.0)
        throw ConfigError("expansion ratio must be non-negative");
    if (ground_percentile < 0.0 || ground_percentile > 1.0)
        throw ConfigError("ground percentile must lie in [0, 1]");
}

}  // namespace cellsplat
