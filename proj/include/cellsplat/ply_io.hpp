// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "cellsplat/types.hpp"

namespace cellsplat {

/// Reads a binary little-endian PLY with 3DGS attribute naming
/// (x,y,z, f_dc_0..2, f_rest_0..44, opacity, scale_0..2, rot_0..3).
/// Extra float properties (e.g. nx,ny,nz normals) are skipped. Raises
/// SchemaError on a missing attribute or a header/payload count mismatch.
GaussianModel read_gaussian_ply(const std::filesystem::path& path);

/// Writes the model with exactly the attribute set above; write then read
/// is the identity, bit for bit.
void write_gaussian_ply(const GaussianModel& model, const std::filesystem::path& path);

}  // namespace cellsplat
