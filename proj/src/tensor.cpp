// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/tensor.hpp"

#include <cmath>
#include <string>

namespace cellsplat {

void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* op) {
    if (!a.same_shape(b))
        throw std::invalid_argument(
            std::string(op) + ": shape mismatch (" + std::to_string(a.height) + "x" +
            std::to_string(a.width) + "x" + std::to_string(a.channels) + " vs " +
            std::to_string(b.height) + "x" + std::to_string(b.width) + "x" +
            std::to_string(b.channels) + ")");
}

ImageTensor reflect_pad_bottom_right(const ImageTensor& img, int pad_bottom,
                                     int pad_right) {
    if (pad_bottom < 0 || pad_right < 0)
        throw std::invalid_argument("negative padding");
    if (pad_bottom > img.height || pad_right > img.width)
        throw std::invalid_argument("reflect padding larger than the image");
    if (pad_bottom == 0 && pad_right == 0) return img;

    ImageTensor out(img.height + pad_bottom, img.width + pad_right, img.channels);
    for (int y = 0; y < out.height; ++y) {
        const int sy = y < img.height ? y : 2 * img.height - 1 - y;
        for (int x = 0; x < out.width; ++x) {
            const int sx = x < img.width ? x : 2 * img.width - 1 - x;
            for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(sy, sx, c);
        }
    }
    return out;
}

ImageTensor crop_top_left(const ImageTensor& img, int h, int w) {
    if (h > img.height || w > img.width)
        throw std::invalid_argument("crop larger than the image");
    if (h == img.height && w == img.width) return img;
    ImageTensor out(h, w, img.channels);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(y, x, c);
    return out;
}

double mean_abs_diff(const ImageTensor& a, const ImageTensor& b) {
    require_same_shape(a, b, "mean_abs_diff");
    if (a.data.empty()) return 0.0;
    // Row-wise partial sums keep the reduction order fixed regardless of
    // thread count.
    std::vector<double> partial(a.height, 0.0);
#pragma omp parallel for
    for (int y = 0; y < a.height; ++y) {
        const double* pa = a.row(y);
        const double* pb = b.row(y);
        double s = 0.0;
        const int n = a.width * a.channels;
        for (int i = 0; i < n; ++i) s += std::abs(pa[i] - pb[i]);
        partial[y] = s;
    }
    double total = 0.0;
    for (double s : partial) total += s;
    return total / static_cast<double>(a.size());
}

double mean_sq_diff(const ImageTensor& a, const ImageTensor& b) {
    require_same_shape(a, b, "mean_sq_diff");
    if (a.data.empty()) return 0.0;
    std::vector<double> partial(a.height, 0.0);
#pragma omp parallel for
    for (int y = 0; y < a.height; ++y) {
        const double* pa = a.row(y);
        const double* pb = b.row(y);
        double s = 0.0;
        const int n = a.width * a.channels;
        for (int i = 0; i < n; ++i) {
            const double d = pa[i] - pb[i];
            s += d * d;
        }
        partial[y] = s;
    }
    double total = 0.0;
    for (double s : partial) total += s;
    return total / static_cast<double>(a.size());
}

}  // namespace cellsplat
