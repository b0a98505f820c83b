// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/ssim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cellsplat {

namespace {

std::vector<double> gaussian_window(int size, double sigma) {
    std::vector<double> w(size);
    const double c = (size - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        w[i] = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
        sum += w[i];
    }
    for (auto& v : w) v /= sum;
    return w;
}

// Per-channel Gaussian-weighted window statistics over valid centers.
struct WindowStats {
    int vh = 0, vw = 0, channels = 0;
    // all maps are vh x vw x channels
    std::vector<double> mu_a, mu_b, var_a, var_b, cov;

    size_t at(int y, int x, int c) const {
        return (static_cast<size_t>(y) * vw + x) * channels + c;
    }
};

// Separable valid-region blur of f (h x w x c) -> ((h-win+1) x (w-win+1) x c).
void blur_valid(const double* f, int h, int w, int c, const std::vector<double>& win,
                double* out) {
    const int k = static_cast<int>(win.size());
    const int vw = w - k + 1;
    const int vh = h - k + 1;
    std::vector<double> tmp(static_cast<size_t>(h) * vw * c);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const double* row = f + static_cast<size_t>(y) * w * c;
        double* trow = tmp.data() + static_cast<size_t>(y) * vw * c;
        for (int x = 0; x < vw; ++x)
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (int i = 0; i < k; ++i)
                    acc += win[i] * row[(static_cast<size_t>(x) + i) * c + ch];
                trow[static_cast<size_t>(x) * c + ch] = acc;
            }
    }
#pragma omp parallel for schedule(static)
    for (int y = 0; y < vh; ++y) {
        double* orow = out + static_cast<size_t>(y) * vw * c;
        for (int x = 0; x < vw; ++x)
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (int i = 0; i < k; ++i)
                    acc += win[i] *
                           tmp[(static_cast<size_t>(y + i) * vw + x) * c + ch];
                orow[static_cast<size_t>(x) * c + ch] = acc;
            }
    }
}

WindowStats window_stats(const ImageTensor& a, const ImageTensor& b,
                         const SsimConfig& cfg) {
    require_same_shape(a, b, "ssim");
    if (a.height < cfg.window || a.width < cfg.window)
        throw std::invalid_argument("ssim: images smaller than the window");

    const auto win = gaussian_window(cfg.window, cfg.sigma);
    WindowStats s;
    s.vh = a.height - cfg.window + 1;
    s.vw = a.width - cfg.window + 1;
    s.channels = a.channels;
    const size_t n = static_cast<size_t>(s.vh) * s.vw * s.channels;
    s.mu_a.resize(n);
    s.mu_b.resize(n);
    s.var_a.resize(n);
    s.var_b.resize(n);
    s.cov.resize(n);

    const size_t total = a.size();
    std::vector<double> aa(total), bb(total), ab(total);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(total); ++i) {
        aa[i] = a.data[i] * a.data[i];
        bb[i] = b.data[i] * b.data[i];
        ab[i] = a.data[i] * b.data[i];
    }

    blur_valid(a.data.data(), a.height, a.width, a.channels, win, s.mu_a.data());
    blur_valid(b.data.data(), a.height, a.width, a.channels, win, s.mu_b.data());
    blur_valid(aa.data(), a.height, a.width, a.channels, win, s.var_a.data());
    blur_valid(bb.data(), a.height, a.width, a.channels, win, s.var_b.data());
    blur_valid(ab.data(), a.height, a.width, a.channels, win, s.cov.data());

#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(n); ++i) {
        s.var_a[i] -= s.mu_a[i] * s.mu_a[i];
        s.var_b[i] -= s.mu_b[i] * s.mu_b[i];
        s.cov[i] -= s.mu_a[i] * s.mu_b[i];
    }
    return s;
}

}  // namespace

double ssim(const ImageTensor& a, const ImageTensor& b, const SsimConfig& cfg) {
    const WindowStats s = window_stats(a, b, cfg);
    const double c1 = cfg.k1 * cfg.dynamic_range * cfg.k1 * cfg.dynamic_range;
    const double c2 = cfg.k2 * cfg.dynamic_range * cfg.k2 * cfg.dynamic_range;

    std::vector<double> partial(s.vh, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < s.vh; ++y) {
        double acc = 0.0;
        for (int x = 0; x < s.vw; ++x)
            for (int c = 0; c < s.channels; ++c) {
                const size_t i = s.at(y, x, c);
                const double num = (2.0 * s.mu_a[i] * s.mu_b[i] + c1) *
                                   (2.0 * s.cov[i] + c2);
                const double den = (s.mu_a[i] * s.mu_a[i] + s.mu_b[i] * s.mu_b[i] + c1) *
                                   (s.var_a[i] + s.var_b[i] + c2);
                acc += num / den;
            }
        partial[y] = acc;
    }
    double total = 0.0;
    for (double v : partial) total += v;
    return total / (static_cast<double>(s.vh) * s.vw * s.channels);
}

ImageTensor ssim_grad_first(const ImageTensor& a, const ImageTensor& b,
                            const SsimConfig& cfg) {
    const WindowStats s = window_stats(a, b, cfg);
    const double c1 = cfg.k1 * cfg.dynamic_range * cfg.k1 * cfg.dynamic_range;
    const double c2 = cfg.k2 * cfg.dynamic_range * cfg.k2 * cfg.dynamic_range;
    const auto win = gaussian_window(cfg.window, cfg.sigma);

    // Per-center partials of the local score wrt (mu_a, var_a, cov); the
    // mean's 1/N lands in the final scale.
    const size_t n = static_cast<size_t>(s.vh) * s.vw * s.channels;
    std::vector<double> c_mu(n), c_var(n), c_cov(n);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(n); ++i) {
        const double a1 = 2.0 * s.mu_a[i] * s.mu_b[i] + c1;
        const double a2 = 2.0 * s.cov[i] + c2;
        const double b1 = s.mu_a[i] * s.mu_a[i] + s.mu_b[i] * s.mu_b[i] + c1;
        const double b2 = s.var_a[i] + s.var_b[i] + c2;
        const double score = (a1 * a2) / (b1 * b2);
        c_mu[i] = 2.0 * s.mu_b[i] * a2 / (b1 * b2) - 2.0 * s.mu_a[i] * score / b1;
        c_var[i] = -score / b2;
        c_cov[i] = 2.0 * a1 / (b1 * b2);
    }

    ImageTensor grad(a.height, a.width, a.channels);
    const double scale = 1.0 / (static_cast<double>(s.vh) * s.vw * s.channels);
    const int k = cfg.window;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < a.height; ++y) {
        for (int x = 0; x < a.width; ++x) {
            for (int c = 0; c < a.channels; ++c) {
                // Window centers whose support covers the source pixel:
                // p in [y-k+1, y] x [x-k+1, x], clamped to the valid region.
                double acc = 0.0;
                const int py0 = std::max(0, y - k + 1);
                const int py1 = std::min(s.vh - 1, y);
                const int px0 = std::max(0, x - k + 1);
                const int px1 = std::min(s.vw - 1, x);
                const double av = a.at(y, x, c);
                const double bv = b.at(y, x, c);
                for (int py = py0; py <= py1; ++py) {
                    const double wy = win[y - py];
                    for (int px = px0; px <= px1; ++px) {
                        const double w2 = wy * win[x - px];
                        const size_t i = s.at(py, px, c);
                        acc += w2 * (c_mu[i] + c_var[i] * 2.0 * (av - s.mu_a[i]) +
                                     c_cov[i] * (bv - s.mu_b[i]));
                    }
                }
                grad.at(y, x, c) = acc * scale;
            }
        }
    }
    return grad;
}

}  // namespace cellsplat
