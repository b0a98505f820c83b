// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>

#include "cellsplat/types.hpp"

namespace cellsplat {

/// Relative paths of extra artifacts stored next to a cell manifest,
/// keyed by role (e.g. "sparse" -> "sparse").
using ArtifactMap = std::map<std::string, std::string>;

/// Writes `<dir>/manifest.json` (version 1) describing the cell: grid
/// indices, original and expanded bounds, camera/point ids, the selection
/// log, and relative artifact paths. Returns the manifest path.
std::filesystem::path write_cell_dataset(const CellDataset& cell,
                                         const std::filesystem::path& dir,
                                         const ArtifactMap& artifacts = {});

/// Reads a manifest back into a CellDataset. write then load is the
/// identity.
CellDataset load_cell_dataset(const std::filesystem::path& dir,
                              ArtifactMap* artifacts = nullptr);

/// Throws SchemaError if the cell references camera or point ids that do
/// not exist in `bundle`.
void validate_cell_against_bundle(const CellDataset& cell, const SceneBundle& bundle);

/// Builds the sub-bundle a cell dataset selects: its cameras and points,
/// with point tracks filtered to the selected cameras (tracks may end up
/// empty for position-selected points seen only from elsewhere).
SceneBundle cell_sub_bundle(const CellDataset& cell, const SceneBundle& bundle);

/// Materializes a self-contained cell directory: manifest.json plus a
/// binary COLMAP model of the cell's data under `<dir>/sparse`.
std::filesystem::path export_cell_dir(const SceneBundle& bundle, const CellDataset& cell,
                                      const std::filesystem::path& dir);

struct CellDirData {
    CellDataset dataset;
    SceneBundle bundle;  // the embedded sparse model
};

/// Loads a directory produced by export_cell_dir and validates that every
/// manifest id resolves inside the embedded model.
CellDirData load_cell_dir(const std::filesystem::path& dir);

}  // namespace cellsplat
