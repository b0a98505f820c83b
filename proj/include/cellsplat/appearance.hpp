// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>

#include "cellsplat/cnn.hpp"
#include "cellsplat/ssim.hpp"
#include "cellsplat/tensor.hpp"

namespace cellsplat {

/// Area-average downsampling by `factor`. Images whose sides are not
/// divisible by the factor are reflect-padded at the bottom/right first,
/// so the output is ceil(h/f) x ceil(w/f).
ImageTensor downsample(const ImageTensor& img, int factor);

/// Appends the embedding to every pixel: (h, w, 3) -> (h, w, 3 + m).
ImageTensor concat_embedding(const ImageTensor& img_small, std::span<const double> emb);

/// Pixel-wise appearance adjustment of a rendered image by a map:
///   multiply        out = render * map[0..3)
///   multiply_add    out = render * map[0..3) + map[3..6)
///   multiply_gamma  out = (render * map[0..3)) ^ softplus(map[3])
/// Outputs are not clamped. For the gamma variant a non-positive base is
/// mapped to 0 with zero gradient.
ImageTensor apply_transform(const ImageTensor& render, const ImageTensor& map,
                            TransformMode mode);

struct TransformGrads {
    ImageTensor map_grad;
    ImageTensor render_grad;
};
TransformGrads apply_transform_backward(const ImageTensor& render,
                                        const ImageTensor& map, TransformMode mode,
                                        const ImageTensor& upstream);

struct LossConfig {
    double lambda = 0.2;  // D-SSIM weight
    SsimConfig ssim;

    void validate() const;
};

/// L = (1 - lambda) * L1(adjusted, gt) + lambda * (1 - SSIM(render, gt)).
/// The L1 term drives the appearance path; the D-SSIM term sees only the
/// raw render, so appearance parameters cannot absorb structure.
struct LossResult {
    double loss = 0.0;
    double l1 = 0.0;
    double dssim = 0.0;
    ImageTensor grad_render;    // d loss / d render (D-SSIM path)
    ImageTensor grad_adjusted;  // d loss / d adjusted (L1 path)
};
LossResult loss_decoupled(const ImageTensor& render, const ImageTensor& adjusted,
                          const ImageTensor& gt, const LossConfig& cfg,
                          bool with_grads = true);

/// Full map path for one view: pad -> downsample -> concat -> CNN -> crop.
ImageTensor appearance_map(const ImageTensor& render, std::span<const double> emb,
                           const CnnParams& params, int downsample_factor = 32,
                           CnnWorkspace* ws = nullptr);

struct TrainView {
    ImageTensor render;
    ImageTensor gt;
};

struct TrainConfig {
    TransformMode mode = TransformMode::kMultiply;
    int steps = 1000;
    double lr = 1e-3;
    int embed_dim = 64;
    uint64_t seed = 0;
    bool identity_init = true;
    double embed_init_std = 0.01;
    int downsample_factor = 32;
    LossConfig loss;
    double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
};

struct TraceRow {
    int step = 0;
    int view = 0;
    double loss = 0.0, l1 = 0.0, dssim = 0.0;
};

struct TrainResult {
    CnnParams params;
    std::vector<std::vector<double>> embeddings;  // one per view
    std::vector<TraceRow> trace;
};

/// Desk-scale appearance optimization: renders are held fixed, one view per
/// Adam step in round-robin order, exact gradients through the transform,
/// CNN, concat and (fixed) downsampled input.
TrainResult train_appearance(std::span<const TrainView> views, const TrainConfig& cfg);

void write_loss_trace_csv(const std::filesystem::path& path,
                          std::span<const TraceRow> trace);

}  // namespace cellsplat
