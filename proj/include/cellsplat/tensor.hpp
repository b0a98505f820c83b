// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace cellsplat {

/// Dense row-major H x W x C image/feature map in double precision.
/// Image data lives in [0,1]; intermediate maps are unbounded.
struct ImageTensor {
    int height = 0, width = 0, channels = 0;
    std::vector<double> data;

    ImageTensor() = default;
    ImageTensor(int h, int w, int c)
        : height(h), width(w), channels(c),
          data(static_cast<size_t>(h) * w * c, 0.0) {
        if (h < 0 || w < 0 || c < 0)
            throw std::invalid_argument("negative tensor dimension");
    }

    size_t size() const { return data.size(); }
    bool same_shape(const ImageTensor& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }

    double& at(int y, int x, int c) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }

    double* row(int y) { return data.data() + static_cast<size_t>(y) * width * channels; }
    const double* row(int y) const {
        return data.data() + static_cast<size_t>(y) * width * channels;
    }
};

/// Pads at the bottom/right edges by mirroring rows/columns (edge row
/// included), so crops undo it exactly.
ImageTensor reflect_pad_bottom_right(const ImageTensor& img, int pad_bottom,
                                     int pad_right);

/// Top-left crop to (h, w).
ImageTensor crop_top_left(const ImageTensor& img, int h, int w);

/// Mean absolute difference over all elements.
double mean_abs_diff(const ImageTensor& a, const ImageTensor& b);

/// Mean squared difference over all elements.
double mean_sq_diff(const ImageTensor& a, const ImageTensor& b);

void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* op);

}  // namespace cellsplat
