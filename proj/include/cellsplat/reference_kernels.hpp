// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace cellsplat::refk {

// Serial reference implementations of the kernels in cellsplat::kernels,
// written as direct per-element formulas with no blocking, threading or
// layout tricks. Tests compare the fast kernels against these; the
// benchmark tool measures the gap.

void conv3x3(const double* in, int h, int w, int cin, const double* weights,
             const double* bias, int cout, double* out);
void conv3x3_grad_input(const double* gout, int h, int w, int cout,
                        const double* weights, int cin, double* gin);
void conv3x3_grad_params(const double* in, const double* gout, int h, int w, int cin,
                         int cout, double* gw, double* gb);
void pixel_shuffle2(const double* in, int h, int w, int cin, double* out);
void pixel_shuffle2_grad(const double* gout, int h, int w, int cin, double* gin);
void bilinear_resize(const double* in, int h, int w, int c, int oh, int ow,
                     double* out);
void bilinear_resize_grad(const double* gout, int oh, int ow, int c, int h, int w,
                          double* gin);
void avgpool(const double* in, int h, int w, int c, int f, double* out);
void avgpool_grad(const double* gout, int h, int w, int c, int f, double* gin);
void relu(double* x, size_t n);
void relu_grad(const double* pre, double* g, size_t n);

}  // namespace cellsplat::refk
