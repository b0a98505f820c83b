// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "cellsplat/types.hpp"

namespace cellsplat {

enum class ColmapFormat { kBinary, kText };

/// Loads a COLMAP sparse reconstruction (cameras/images/points3D in either
/// binary or text layout) into a SceneBundle. Shared COLMAP camera records
/// are joined onto their images, so every CameraView carries its own
/// intrinsics. Only PINHOLE and SIMPLE_PINHOLE models are accepted; any
/// other model raises SchemaError rather than being approximated.
///
/// `dir` may be the model directory itself or a dataset root containing
/// sparse/0 or sparse.
SceneBundle load_colmap_sparse(const std::filesystem::path& dir);

/// Writes a bundle back out in COLMAP layout, one camera record per view
/// (PINHOLE), image records with empty 2D observation lists, and point
/// tracks referencing image ids.
void write_colmap_sparse(const SceneBundle& bundle, const std::filesystem::path& dir,
                         ColmapFormat format);

}  // namespace cellsplat
