// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "cellsplat/tensor.hpp"

namespace cellsplat {

/// Reads a PNG into a 3-channel tensor with values in [0,1]. Grayscale and
/// alpha variants are converted to plain RGB.
ImageTensor read_png(const std::filesystem::path& path);

/// Writes a 3-channel tensor as 8-bit RGB; values are clamped to [0,1].
void write_png(const std::filesystem::path& path, const ImageTensor& img);

}  // namespace cellsplat
