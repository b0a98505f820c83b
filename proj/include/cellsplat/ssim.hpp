// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "cellsplat/tensor.hpp"

namespace cellsplat {

struct SsimConfig {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

/// Gaussian-windowed SSIM averaged per channel over the valid region
/// (window centers where the 11x11 support fits entirely inside the
/// image). Inputs must share shape and be at least window x window.
double ssim(const ImageTensor& a, const ImageTensor& b, const SsimConfig& cfg = {});

/// Structural dissimilarity, 1 - SSIM.
inline double d_ssim(const ImageTensor& a, const ImageTensor& b,
                     const SsimConfig& cfg = {}) {
    return 1.0 - ssim(a, b, cfg);
}

/// Gradient of ssim(a, b) with respect to `a`.
ImageTensor ssim_grad_first(const ImageTensor& a, const ImageTensor& b,
                            const SsimConfig& cfg = {});

}  // namespace cellsplat
