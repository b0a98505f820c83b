// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace cellsplat::kernels {

// OpenMP-parallel kernels over channels-last (H x W x C) buffers. Every
// output element is accumulated in a fixed serial order, so results are
// bit-identical across thread counts. The serial counterparts in
// cellsplat::refk mirror these signatures and serve as the independent
// reference in tests and benchmarks.

/// 3x3 convolution, stride 1, zero padding 1 ("same"). Weights are laid
/// out [ky][kx][cin][cout]; bias has cout entries. out must hold h*w*cout.
void conv3x3(const double* in, int h, int w, int cin, const double* weights,
             const double* bias, int cout, double* out);

/// Gradient wrt the conv input. gin must hold h*w*cin.
void conv3x3_grad_input(const double* gout, int h, int w, int cout,
                        const double* weights, int cin, double* gin);

/// Gradients wrt weights and bias. gw/gb are accumulated from zero.
void conv3x3_grad_params(const double* in, const double* gout, int h, int w, int cin,
                         int cout, double* gw, double* gb);

/// Pixel shuffle with factor 2: (h, w, c) -> (2h, 2w, c/4) where input
/// channel c_out*4 + dy*2 + dx feeds output (2y+dy, 2x+dx, c_out).
void pixel_shuffle2(const double* in, int h, int w, int cin, double* out);

/// Inverse permutation of pixel_shuffle2 (gradient routing).
void pixel_shuffle2_grad(const double* gout, int h, int w, int cin, double* gin);

/// Bilinear resize to (oh, ow), half-pixel centers, edges clamped.
void bilinear_resize(const double* in, int h, int w, int c, int oh, int ow,
                     double* out);

/// Transpose of bilinear_resize; gin is accumulated from zero.
void bilinear_resize_grad(const double* gout, int oh, int ow, int c, int h, int w,
                          double* gin);

/// Area-average pooling by factor f; h and w must be divisible by f.
void avgpool(const double* in, int h, int w, int c, int f, double* out);

/// Spreads each pooled gradient uniformly over its f*f block.
void avgpool_grad(const double* gout, int h, int w, int c, int f, double* gin);

/// In-place ReLU.
void relu(double* x, size_t n);

/// Zeroes gradient entries where the pre-activation was <= 0 (the
/// subgradient at exactly 0 is taken as 0).
void relu_grad(const double* pre, double* g, size_t n);

}  // namespace cellsplat::kernels
