// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "cellsplat/types.hpp"

namespace cellsplat {

/// Keeps exactly the Gaussians whose (x, z) lies in the rect, half-open.
/// Attribute rows stay aligned. Vertical position never culls.
GaussianModel cull_outside(const GaussianModel& model, const GroundRect& original);

/// Spec-aware variant: outer grid edges are closed, matching the partition
/// membership rule, so boundary-sitting Gaussians survive in exactly one
/// cell.
GaussianModel cull_outside(const GaussianModel& model, const CellSpec& spec);

struct CellModel {
    GaussianModel model;
    CellSpec spec;
};

/// Culls every cell to its original bounds and concatenates in row-major
/// cell order. Throws GeometryError when original rects overlap.
GaussianModel merge_cells(std::span<const CellModel> cells);

/// Gaussian density in strips on either side of each internal cell
/// boundary. `ratio` is lower/upper density; an empty side yields +inf
/// (reported as null in JSON).
struct SeamBoundary {
    char axis = 'x';  // 'x': boundary plane x = coordinate; 'z' likewise
    double coordinate = 0.0;
    double span_min = 0.0, span_max = 0.0;  // extent along the other axis
    double strip_width = 0.0;
    int64_t lower_count = 0, upper_count = 0;
    double lower_density = 0.0, upper_density = 0.0;
    double ratio = 0.0;
};

std::vector<SeamBoundary> seam_report(const GaussianModel& merged,
                                      std::span<const CellSpec> specs,
                                      double strip_fraction = 0.05);

std::string seam_report_json(std::span<const SeamBoundary> report);

}  // namespace cellsplat
