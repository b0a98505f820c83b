// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/kernels.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <vector>

namespace cellsplat::kernels {

void conv3x3(const double* in, int h, int w, int cin, const double* weights,
             const double* bias, int cout, double* out) {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        double* orow = out + static_cast<size_t>(y) * w * cout;
        for (int x = 0; x < w; ++x) {
            double* o = orow + static_cast<size_t>(x) * cout;
            for (int oc = 0; oc < cout; ++oc) o[oc] = bias[oc];
        }
        for (int ky = 0; ky < 3; ++ky) {
            const int sy = y + ky - 1;
            if (sy < 0 || sy >= h) continue;
            const double* irow = in + static_cast<size_t>(sy) * w * cin;
            for (int x = 0; x < w; ++x) {
                double* o = orow + static_cast<size_t>(x) * cout;
                for (int kx = 0; kx < 3; ++kx) {
                    const int sx = x + kx - 1;
                    if (sx < 0 || sx >= w) continue;
                    const double* i = irow + static_cast<size_t>(sx) * cin;
                    const double* wk =
                        weights + (static_cast<size_t>(ky) * 3 + kx) * cin * cout;
                    for (int ic = 0; ic < cin; ++ic) {
                        const double v = i[ic];
                        const double* wrow = wk + static_cast<size_t>(ic) * cout;
                        for (int oc = 0; oc < cout; ++oc) o[oc] += v * wrow[oc];
                    }
                }
            }
        }
    }
}

void conv3x3_grad_input(const double* gout, int h, int w, int cout,
                        const double* weights, int cin, double* gin) {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        double* grow = gin + static_cast<size_t>(y) * w * cin;
        std::memset(grow, 0, sizeof(double) * static_cast<size_t>(w) * cin);
        // input (y, x) feeds output (y - (ky - 1), x - (kx - 1))
        for (int ky = 0; ky < 3; ++ky) {
            const int oy = y - ky + 1;
            if (oy < 0 || oy >= h) continue;
            const double* gorow = gout + static_cast<size_t>(oy) * w * cout;
            for (int x = 0; x < w; ++x) {
                double* g = grow + static_cast<size_t>(x) * cin;
                for (int kx = 0; kx < 3; ++kx) {
                    const int ox = x - kx + 1;
                    if (ox < 0 || ox >= w) continue;
                    const double* go = gorow + static_cast<size_t>(ox) * cout;
                    const double* wk =
                        weights + (static_cast<size_t>(ky) * 3 + kx) * cin * cout;
                    for (int ic = 0; ic < cin; ++ic) {
                        const double* wrow = wk + static_cast<size_t>(ic) * cout;
                        double s = 0.0;
                        for (int oc = 0; oc < cout; ++oc) s += go[oc] * wrow[oc];
                        g[ic] += s;
                    }
                }
            }
        }
    }
}

void conv3x3_grad_params(const double* in, const double* gout, int h, int w, int cin,
                         int cout, double* gw, double* gb) {
    std::memset(gw, 0, sizeof(double) * 9 * static_cast<size_t>(cin) * cout);
    std::memset(gb, 0, sizeof(double) * static_cast<size_t>(cout));
    // One (ky, kx) tap per task keeps accumulation per weight serial.
#pragma omp parallel for collapse(2) schedule(static)
    for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
            double* gwk = gw + (static_cast<size_t>(ky) * 3 + kx) * cin * cout;
            for (int y = 0; y < h; ++y) {
                const int sy = y + ky - 1;
                if (sy < 0 || sy >= h) continue;
                const double* irow = in + static_cast<size_t>(sy) * w * cin;
                const double* gorow = gout + static_cast<size_t>(y) * w * cout;
                for (int x = 0; x < w; ++x) {
                    const int sx = x + kx - 1;
                    if (sx < 0 || sx >= w) continue;
                    const double* i = irow + static_cast<size_t>(sx) * cin;
                    const double* go = gorow + static_cast<size_t>(x) * cout;
                    for (int ic = 0; ic < cin; ++ic) {
                        double* grow = gwk + static_cast<size_t>(ic) * cout;
                        const double v = i[ic];
                        for (int oc = 0; oc < cout; ++oc) grow[oc] += v * go[oc];
                    }
                }
            }
        }
    }
    for (int y = 0; y < h; ++y) {
        const double* gorow = gout + static_cast<size_t>(y) * w * cout;
        for (int x = 0; x < w; ++x) {
            const double* go = gorow + static_cast<size_t>(x) * cout;
            for (int oc = 0; oc < cout; ++oc) gb[oc] += go[oc];
        }
    }
}

void pixel_shuffle2(const double* in, int h, int w, int cin, double* out) {
    const int cout = cin / 4;
    const int ow = 2 * w;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const double* irow = in + static_cast<size_t>(y) * w * cin;
        for (int dy = 0; dy < 2; ++dy) {
            double* orow = out + static_cast<size_t>(2 * y + dy) * ow * cout;
            for (int x = 0; x < w; ++x) {
                const double* i = irow + static_cast<size_t>(x) * cin;
                for (int dx = 0; dx < 2; ++dx) {
                    double* o = orow + static_cast<size_t>(2 * x + dx) * cout;
                    for (int oc = 0; oc < cout; ++oc)
                        o[oc] = i[oc * 4 + dy * 2 + dx];
                }
            }
        }
    }
}

void pixel_shuffle2_grad(const double* gout, int h, int w, int cin, double* gin) {
    const int cout = cin / 4;
    const int ow = 2 * w;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        double* grow = gin + static_cast<size_t>(y) * w * cin;
        for (int dy = 0; dy < 2; ++dy) {
            const double* gorow = gout + static_cast<size_t>(2 * y + dy) * ow * cout;
            for (int x = 0; x < w; ++x) {
                double* g = grow + static_cast<size_t>(x) * cin;
                for (int dx = 0; dx < 2; ++dx) {
                    const double* go = gorow + static_cast<size_t>(2 * x + dx) * cout;
                    for (int oc = 0; oc < cout; ++oc)
                        g[oc * 4 + dy * 2 + dx] = go[oc];
                }
            }
        }
    }
}

namespace {

struct Tap {
    int lo = 0, hi = 0;
    double w_hi = 0.0;  // weight of hi; lo gets (1 - w_hi)
};

// Half-pixel-center source tap for one output coordinate.
Tap bilinear_tap(int dst, int in_size, int out_size) {
    const double scale = static_cast<double>(in_size) / out_size;
    double src = (dst + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in_size - 1));
    Tap t;
    t.lo = static_cast<int>(src);
    t.hi = std::min(t.lo + 1, in_size - 1);
    t.w_hi = src - t.lo;
    return t;
}

}  // namespace

void bilinear_resize(const double* in, int h, int w, int c, int oh, int ow,
                     double* out) {
    std::vector<Tap> xt(ow);
    for (int x = 0; x < ow; ++x) xt[x] = bilinear_tap(x, w, ow);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < oh; ++y) {
        const Tap ty = bilinear_tap(y, h, oh);
        const double* r0 = in + static_cast<size_t>(ty.lo) * w * c;
        const double* r1 = in + static_cast<size_t>(ty.hi) * w * c;
        double* orow = out + static_cast<size_t>(y) * ow * c;
        for (int x = 0; x < ow; ++x) {
            const Tap& tx = xt[x];
            const double w00 = (1 - ty.w_hi) * (1 - tx.w_hi);
            const double w01 = (1 - ty.w_hi) * tx.w_hi;
            const double w10 = ty.w_hi * (1 - tx.w_hi);
            const double w11 = ty.w_hi * tx.w_hi;
            const double* p00 = r0 + static_cast<size_t>(tx.lo) * c;
            const double* p01 = r0 + static_cast<size_t>(tx.hi) * c;
            const double* p10 = r1 + static_cast<size_t>(tx.lo) * c;
            const double* p11 = r1 + static_cast<size_t>(tx.hi) * c;
            double* o = orow + static_cast<size_t>(x) * c;
            for (int k = 0; k < c; ++k)
                o[k] = w00 * p00[k] + w01 * p01[k] + w10 * p10[k] + w11 * p11[k];
        }
    }
}

void bilinear_resize_grad(const double* gout, int oh, int ow, int c, int h, int w,
                          double* gin) {
    std::memset(gin, 0, sizeof(double) * static_cast<size_t>(h) * w * c);
    // Serial scatter: the map is tiny compared to the convolutions and a
    // fixed accumulation order keeps it deterministic.
    for (int y = 0; y < oh; ++y) {
        const Tap ty = bilinear_tap(y, h, oh);
        const double* gorow = gout + static_cast<size_t>(y) * ow * c;
        for (int x = 0; x < ow; ++x) {
            const Tap tx = bilinear_tap(x, w, ow);
            const double w00 = (1 - ty.w_hi) * (1 - tx.w_hi);
            const double w01 = (1 - ty.w_hi) * tx.w_hi;
            const double w10 = ty.w_hi * (1 - tx.w_hi);
            const double w11 = ty.w_hi * tx.w_hi;
            const double* go = gorow + static_cast<size_t>(x) * c;
            double* g00 = gin + (static_cast<size_t>(ty.lo) * w + tx.lo) * c;
            double* g01 = gin + (static_cast<size_t>(ty.lo) * w + tx.hi) * c;
            double* g10 = gin + (static_cast<size_t>(ty.hi) * w + tx.lo) * c;
            double* g11 = gin + (static_cast<size_t>(ty.hi) * w + tx.hi) * c;
            for (int k = 0; k < c; ++k) {
                g00[k] += w00 * go[k];
                g01[k] += w01 * go[k];
                g10[k] += w10 * go[k];
                g11[k] += w11 * go[k];
            }
        }
    }
}

void avgpool(const double* in, int h, int w, int c, int f, double* out) {
    const int oh = h / f, ow = w / f;
    const double inv = 1.0 / (static_cast<double>(f) * f);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < oh; ++y) {
        double* orow = out + static_cast<size_t>(y) * ow * c;
        std::memset(orow, 0, sizeof(double) * static_cast<size_t>(ow) * c);
        for (int dy = 0; dy < f; ++dy) {
            const double* irow = in + static_cast<size_t>(y * f + dy) * w * c;
            for (int x = 0; x < ow; ++x) {
                double* o = orow + static_cast<size_t>(x) * c;
                for (int dx = 0; dx < f; ++dx) {
                    const double* i = irow + static_cast<size_t>(x * f + dx) * c;
                    for (int k = 0; k < c; ++k) o[k] += i[k];
                }
            }
        }
        for (int i = 0; i < ow * c; ++i) orow[i] *= inv;
    }
}

void avgpool_grad(const double* gout, int h, int w, int c, int f, double* gin) {
    const int ow = w / f;
    const double inv = 1.0 / (static_cast<double>(f) * f);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const double* gorow = gout + static_cast<size_t>(y / f) * ow * c;
        double* grow = gin + static_cast<size_t>(y) * w * c;
        for (int x = 0; x < w; ++x) {
            const double* go = gorow + static_cast<size_t>(x / f) * c;
            double* g = grow + static_cast<size_t>(x) * c;
            for (int k = 0; k < c; ++k) g[k] = go[k] * inv;
        }
    }
}

void relu(double* x, size_t n) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(n); ++i)
        if (x[i] < 0.0) x[i] = 0.0;
}

void relu_grad(const double* pre, double* g, size_t n) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(n); ++i)
        if (pre[i] <= 0.0) g[i] = 0.0;
}

}  // namespace cellsplat::kernels
