// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include "cellsplat/tensor.hpp"

namespace cellsplat {

/// Peak signal-to-noise ratio for range-1 data, 10*log10(1/MSE), capped at
/// 100 dB when the MSE drops below 1e-10.
double psnr(const ImageTensor& a, const ImageTensor& b);

/// Per-channel affine correction render -> gain * render + bias.
struct ColorCorrection {
    Eigen::Vector3d gain = Eigen::Vector3d::Ones();
    Eigen::Vector3d bias = Eigen::Vector3d::Zero();
};

/// Least-squares fit of gain and bias per channel so the corrected render
/// matches gt. With affine=false only the gain is fit (bias pinned at 0).
/// A constant render channel degenerates to gain 0, bias mean(gt).
ColorCorrection fit_color_correction(const ImageTensor& render, const ImageTensor& gt,
                                     bool affine = true);

ImageTensor apply_color_correction(const ImageTensor& img, const ColorCorrection& cc);

}  // namespace cellsplat
