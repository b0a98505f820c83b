// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/metrics.hpp"

#include <cmath>

namespace cellsplat {

double psnr(const ImageTensor& a, const ImageTensor& b) {
    require_same_shape(a, b, "psnr");
    const double mse = mean_sq_diff(a, b);
    if (mse < 1e-10) return 100.0;
    return 10.0 * std::log10(1.0 / mse);
}

ColorCorrection fit_color_correction(const ImageTensor& render, const ImageTensor& gt,
                                     bool affine) {
    require_same_shape(render, gt, "fit_color_correction");
    if (render.channels != 3)
        throw std::invalid_argument("color correction expects 3-channel images");
    const int64_t n = static_cast<int64_t>(render.size()) / 3;
    if (n == 0) throw std::invalid_argument("color correction on an empty image");

    ColorCorrection cc;
    for (int c = 0; c < 3; ++c) {
        double sum_r = 0, sum_g = 0, sum_rr = 0, sum_rg = 0;
        for (int64_t i = 0; i < n; ++i) {
            const double r = render.data[i * 3 + c];
            const double g = gt.data[i * 3 + c];
            sum_r += r;
            sum_g += g;
            sum_rr += r * r;
            sum_rg += r * g;
        }
        const double nd = static_cast<double>(n);
        if (affine) {
            const double var = sum_rr - sum_r * sum_r / nd;
            if (var <= 1e-12 * nd) {  // constant channel
                cc.gain[c] = 0.0;
                cc.bias[c] = sum_g / nd;
            } else {
                const double cov = sum_rg - sum_r * sum_g / nd;
                cc.gain[c] = cov / var;
                cc.bias[c] = (sum_g - cc.gain[c] * sum_r) / nd;
            }
        } else {
            if (sum_rr <= 1e-12 * nd) {
                cc.gain[c] = 0.0;
            } else {
                cc.gain[c] = sum_rg / sum_rr;
            }
            cc.bias[c] = 0.0;
        }
    }
    return cc;
}

ImageTensor apply_color_correction(const ImageTensor& img, const ColorCorrection& cc) {
    if (img.channels != 3)
        throw std::invalid_argument("color correction expects 3-channel images");
    ImageTensor out(img.height, img.width, 3);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(img.size()) / 3; ++i)
        for (int c = 0; c < 3; ++c)
            out.data[i * 3 + c] = cc.gain[c] * img.data[i * 3 + c] + cc.bias[c];
    return out;
}

}  // namespace cellsplat
