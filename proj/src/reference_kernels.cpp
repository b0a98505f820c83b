// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/reference_kernels.hpp"

#include <algorithm>
#include <cmath>

namespace cellsplat::refk {

namespace {

inline size_t idx(int y, int x, int c, int w, int channels) {
    return (static_cast<size_t>(y) * w + x) * channels + c;
}

inline size_t widx(int ky, int kx, int ic, int oc, int cin, int cout) {
    return ((static_cast<size_t>(ky) * 3 + kx) * cin + ic) * cout + oc;
}

}  // namespace

void conv3x3(const double* in, int h, int w, int cin, const double* weights,
             const double* bias, int cout, double* out) {
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int oc = 0; oc < cout; ++oc) {
                double acc = bias[oc];
                for (int ky = 0; ky < 3; ++ky)
                    for (int kx = 0; kx < 3; ++kx) {
                        const int sy = y + ky - 1;
                        const int sx = x + kx - 1;
                        if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
                        for (int ic = 0; ic < cin; ++ic)
                            acc += in[idx(sy, sx, ic, w, cin)] *
                                   weights[widx(ky, kx, ic, oc, cin, cout)];
                    }
                out[idx(y, x, oc, w, cout)] = acc;
            }
}

void conv3x3_grad_input(const double* gout, int h, int w, int cout,
                        const double* weights, int cin, double* gin) {
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ic = 0; ic < cin; ++ic) {
                double acc = 0.0;
                for (int ky = 0; ky < 3; ++ky)
                    for (int kx = 0; kx < 3; ++kx) {
                        const int oy = y - ky + 1;
                        const int ox = x - kx + 1;
                        if (oy < 0 || oy >= h || ox < 0 || ox >= w) continue;
                        for (int oc = 0; oc < cout; ++oc)
                            acc += gout[idx(oy, ox, oc, w, cout)] *
                                   weights[widx(ky, kx, ic, oc, cin, cout)];
                    }
                gin[idx(y, x, ic, w, cin)] = acc;
            }
}

void conv3x3_grad_params(const double* in, const double* gout, int h, int w, int cin,
                         int cout, double* gw, double* gb) {
    for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx)
            for (int ic = 0; ic < cin; ++ic)
                for (int oc = 0; oc < cout; ++oc) {
                    double acc = 0.0;
                    for (int y = 0; y < h; ++y)
                        for (int x = 0; x < w; ++x) {
                            const int sy = y + ky - 1;
                            const int sx = x + kx - 1;
                            if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
                            acc += in[idx(sy, sx, ic, w, cin)] *
                                   gout[idx(y, x, oc, w, cout)];
                        }
                    gw[widx(ky, kx, ic, oc, cin, cout)] = acc;
                }
    for (int oc = 0; oc < cout; ++oc) {
        double acc = 0.0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) acc += gout[idx(y, x, oc, w, cout)];
        gb[oc] = acc;
    }
}

void pixel_shuffle2(const double* in, int h, int w, int cin, double* out) {
    const int cout = cin / 4;
    for (int y = 0; y < 2 * h; ++y)
        for (int x = 0; x < 2 * w; ++x)
            for (int oc = 0; oc < cout; ++oc)
                out[idx(y, x, oc, 2 * w, cout)] =
                    in[idx(y / 2, x / 2, oc * 4 + (y % 2) * 2 + (x % 2), w, cin)];
}

void pixel_shuffle2_grad(const double* gout, int h, int w, int cin, double* gin) {
    const int cout = cin / 4;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ic = 0; ic < cin; ++ic) {
                const int oc = ic / 4;
                const int dy = (ic % 4) / 2;
                const int dx = ic % 2;
                gin[idx(y, x, ic, w, cin)] =
                    gout[idx(2 * y + dy, 2 * x + dx, oc, 2 * w, cout)];
            }
}

void bilinear_resize(const double* in, int h, int w, int c, int oh, int ow,
                     double* out) {
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double sy = (y + 0.5) * h / oh - 0.5;
            double sx = (x + 0.5) * w / ow - 0.5;
            sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
            sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
            const int y0 = static_cast<int>(sy);
            const int x0 = static_cast<int>(sx);
            const int y1 = std::min(y0 + 1, h - 1);
            const int x1 = std::min(x0 + 1, w - 1);
            const double fy = sy - y0;
            const double fx = sx - x0;
            for (int k = 0; k < c; ++k) {
                const double v =
                    (1 - fy) * (1 - fx) * in[idx(y0, x0, k, w, c)] +
                    (1 - fy) * fx * in[idx(y0, x1, k, w, c)] +
                    fy * (1 - fx) * in[idx(y1, x0, k, w, c)] +
                    fy * fx * in[idx(y1, x1, k, w, c)];
                out[idx(y, x, k, ow, c)] = v;
            }
        }
}

void bilinear_resize_grad(const double* gout, int oh, int ow, int c, int h, int w,
                          double* gin) {
    for (size_t i = 0; i < static_cast<size_t>(h) * w * c; ++i) gin[i] = 0.0;
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double sy = (y + 0.5) * h / oh - 0.5;
            double sx = (x + 0.5) * w / ow - 0.5;
            sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
            sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
            const int y0 = static_cast<int>(sy);
            const int x0 = static_cast<int>(sx);
            const int y1 = std::min(y0 + 1, h - 1);
            const int x1 = std::min(x0 + 1, w - 1);
            const double fy = sy - y0;
            const double fx = sx - x0;
            for (int k = 0; k < c; ++k) {
                const double g = gout[idx(y, x, k, ow, c)];
                gin[idx(y0, x0, k, w, c)] += (1 - fy) * (1 - fx) * g;
                gin[idx(y0, x1, k, w, c)] += (1 - fy) * fx * g;
                gin[idx(y1, x0, k, w, c)] += fy * (1 - fx) * g;
                gin[idx(y1, x1, k, w, c)] += fy * fx * g;
            }
        }
}

void avgpool(const double* in, int h, int w, int c, int f, double* out) {
    const int oh = h / f, ow = w / f;
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
            for (int k = 0; k < c; ++k) {
                double acc = 0.0;
                for (int dy = 0; dy < f; ++dy)
                    for (int dx = 0; dx < f; ++dx)
                        acc += in[idx(y * f + dy, x * f + dx, k, w, c)];
                out[idx(y, x, k, ow, c)] = acc / (static_cast<double>(f) * f);
            }
}

void avgpool_grad(const double* gout, int h, int w, int c, int f, double* gin) {
    const int ow = w / f;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int k = 0; k < c; ++k)
                gin[idx(y, x, k, w, c)] =
                    gout[idx(y / f, x / f, k, ow, c)] / (static_cast<double>(f) * f);
}

void relu(double* x, size_t n) {
    for (size_t i = 0; i < n; ++i) x[i] = std::max(0.0, x[i]);
}

void relu_grad(const double* pre, double* g, size_t n) {
    for (size_t i = 0; i < n; ++i)
        if (pre[i] <= 0.0) g[i] = 0.0;
}

}  // namespace cellsplat::refk
