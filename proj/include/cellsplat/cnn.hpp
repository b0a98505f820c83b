// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cellsplat/tensor.hpp"

namespace cellsplat {

/// Pixel-wise adjustment family applied to a rendered image.
enum class TransformMode { kMultiply, kMultiplyAdd, kMultiplyGamma };

/// Map channels per mode: 3 (gains), 6 (gains + offsets), 4 (gains + gamma).
int transform_out_channels(TransformMode mode);

const char* to_string(TransformMode mode);
TransformMode transform_mode_from_string(const std::string& s);

/// One 3x3 same-convolution layer; weights laid out [ky][kx][cin][cout].
struct ConvLayer {
    int in_ch = 0, out_ch = 0;
    std::vector<double> weights;  // 9 * in_ch * out_ch
    std::vector<double> bias;     // out_ch

    static ConvLayer zeros(int in_ch, int out_ch);
};

/// The map-generating network: a 3x3 conv lifts the (3+m)-channel input to
/// 256 channels, four upsampling blocks (pixel shuffle x2, 3x3 conv halving
/// the channel depth, ReLU) walk the chain 256->128->64->32->16, bilinear
/// interpolation doubles the resolution to the full image size, and two 3x3
/// convs with a ReLU in between produce the map. `output_offset` is a fixed
/// per-channel constant added to the map so an all-zero tail yields the
/// identity transform; it is structural, not a trainable parameter.
struct CnnParams {
    int embed_dim = 64;
    TransformMode mode = TransformMode::kMultiply;
    ConvLayer head;                  // 3+m -> 256
    std::array<ConvLayer, 4> blocks; // 64->128, 32->64, 16->32, 8->16
    ConvLayer tail_a;                // 16 -> 16
    ConvLayer tail_b;                // 16 -> out_channels
    std::vector<double> output_offset;

    size_t parameter_count() const;
};

/// Fan-in-scaled uniform initialization (weights in +-1/sqrt(9*cin), biases
/// zero). With identity_output the final conv starts at zero and the offset
/// is set so the initial map is the identity transform for `mode`.
/// `head_channels` (divisible by 32) scales the whole chain; 256 is the
/// production width, smaller widths exist for exhaustive gradient checks.
CnnParams make_cnn(int embed_dim, TransformMode mode, uint64_t seed,
                   bool identity_output = true, int head_channels = 256);

/// Named view of every trainable tensor, for the optimizer and tests.
struct TensorRef {
    std::string name;
    double* data = nullptr;
    size_t size = 0;
};
std::vector<TensorRef> parameter_tensors(CnnParams& params);

/// Activation stash written by cnn_forward and consumed by cnn_backward.
struct CnnWorkspace {
    ImageTensor input;
    ImageTensor head_out;
    std::array<ImageTensor, 4> ps_out;
    std::array<ImageTensor, 4> block_pre;
    std::array<ImageTensor, 4> block_post;
    ImageTensor bilinear_out;
    ImageTensor tail_a_pre;
    ImageTensor tail_a_post;
};

/// Runs the network on a (3+m)-channel input of shape (h, w) and returns
/// the (32h, 32w, out_channels) transformation map. Deterministic for fixed
/// inputs, independent of thread count.
ImageTensor cnn_forward(const ImageTensor& d, const CnnParams& params,
                        CnnWorkspace* ws = nullptr);

/// Reverse-mode gradients for every conv layer plus the network input.
struct CnnGrads {
    ConvLayer head;
    std::array<ConvLayer, 4> blocks;
    ConvLayer tail_a;
    ConvLayer tail_b;
    ImageTensor input_grad;
};
CnnGrads cnn_backward(const ImageTensor& upstream, const CnnParams& params,
                      const CnnWorkspace& ws);

/// Versioned binary checkpoint of CNN parameters plus per-view embeddings.
/// Layout (little-endian): magic "CSAC", u32 version=1, u32 mode, u32
/// embed_dim, u32 head_channels, u64 n_views, then each tensor as u64
/// length + doubles in a fixed order (head w/b, block[0..3] w/b, tail_a
/// w/b, tail_b w/b, output_offset, then the embeddings row by row).
void save_appearance_checkpoint(const std::filesystem::path& path,
                                const CnnParams& params,
                                const std::vector<std::vector<double>>& embeddings);
struct AppearanceCheckpoint {
    CnnParams params;
    std::vector<std::vector<double>> embeddings;
};
AppearanceCheckpoint load_appearance_checkpoint(const std::filesystem::path& path);

}  // namespace cellsplat
