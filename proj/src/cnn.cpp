// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/cnn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "cellsplat/error.hpp"
#include "cellsplat/kernels.hpp"

namespace cellsplat {

int transform_out_channels(TransformMode mode) {
    switch (mode) {
        case TransformMode::kMultiply: return 3;
        case TransformMode::kMultiplyAdd: return 6;
        case TransformMode::kMultiplyGamma: return 4;
    }
    return 3;
}

const char* to_string(TransformMode mode) {
    switch (mode) {
        case TransformMode::kMultiply: return "multiply";
        case TransformMode::kMultiplyAdd: return "multiply_add";
        case TransformMode::kMultiplyGamma: return "multiply_gamma";
    }
    return "multiply";
}

TransformMode transform_mode_from_string(const std::string& s) {
    if (s == "multiply") return TransformMode::kMultiply;
    if (s == "multiply_add") return TransformMode::kMultiplyAdd;
    if (s == "multiply_gamma") return TransformMode::kMultiplyGamma;
    throw ConfigError("unknown transform mode '" + s + "'");
}

ConvLayer ConvLayer::zeros(int in_ch, int out_ch) {
    ConvLayer l;
    l.in_ch = in_ch;
    l.out_ch = out_ch;
    l.weights.assign(9 * static_cast<size_t>(in_ch) * out_ch, 0.0);
    l.bias.assign(out_ch, 0.0);
    return l;
}

size_t CnnParams::parameter_count() const {
    size_t n = head.weights.size() + head.bias.size();
    for (const auto& b : blocks) n += b.weights.size() + b.bias.size();
    n += tail_a.weights.size() + tail_a.bias.size();
    n += tail_b.weights.size() + tail_b.bias.size();
    return n;
}

namespace {

void init_layer(ConvLayer& l, std::mt19937_64& rng) {
    const double s = 1.0 / std::sqrt(9.0 * l.in_ch);
    std::uniform_real_distribution<double> dist(-s, s);
    for (auto& w : l.weights) w = dist(rng);
    // biases stay zero
}

double softplus_inverse(double y) { return std::log(std::expm1(y)); }

}  // namespace

CnnParams make_cnn(int embed_dim, TransformMode mode, uint64_t seed,
                   bool identity_output, int head_channels) {
    if (embed_dim < 0) throw ConfigError("embedding length must be >= 0");
    if (head_channels < 32 || head_channels % 32 != 0)
        throw ConfigError("head_channels must be a positive multiple of 32");
    CnnParams p;
    p.embed_dim = embed_dim;
    p.mode = mode;
    p.head = ConvLayer::zeros(3 + embed_dim, head_channels);
    int ch = head_channels;
    for (auto& b : p.blocks) {
        b = ConvLayer::zeros(ch / 4, ch / 2);
        ch /= 2;
    }
    p.tail_a = ConvLayer::zeros(ch, ch);  // 16 -> 16
    p.tail_b = ConvLayer::zeros(ch, transform_out_channels(mode));

    std::mt19937_64 rng(seed);
    init_layer(p.head, rng);
    for (auto& b : p.blocks) init_layer(b, rng);
    init_layer(p.tail_a, rng);
    if (!identity_output) init_layer(p.tail_b, rng);

    p.output_offset.assign(transform_out_channels(mode), 0.0);
    if (identity_output) {
        // Identity transform: unit gains; zero additive term; gamma channel
        // at softplus^{-1}(1) so the initial exponent is exactly 1.
        p.output_offset[0] = p.output_offset[1] = p.output_offset[2] = 1.0;
        if (mode == TransformMode::kMultiplyGamma)
            p.output_offset[3] = softplus_inverse(1.0);
    }
    return p;
}

std::vector<TensorRef> parameter_tensors(CnnParams& p) {
    std::vector<TensorRef> refs;
    const auto add = [&](const std::string& name, ConvLayer& l) {
        refs.push_back({name + ".weights", l.weights.data(), l.weights.size()});
        refs.push_back({name + ".bias", l.bias.data(), l.bias.size()});
    };
    add("head", p.head);
    for (size_t i = 0; i < p.blocks.size(); ++i)
        add("block" + std::to_string(i), p.blocks[i]);
    add("tail_a", p.tail_a);
    add("tail_b", p.tail_b);
    return refs;
}

ImageTensor cnn_forward(const ImageTensor& d, const CnnParams& params,
                        CnnWorkspace* ws) {
    if (d.channels != 3 + params.embed_dim)
        throw std::invalid_argument(
            "cnn_forward: input has " + std::to_string(d.channels) +
            " channels, expected " + std::to_string(3 + params.embed_dim));
    if (d.height <= 0 || d.width <= 0)
        throw std::invalid_argument("cnn_forward: empty input");

    CnnWorkspace local;
    CnnWorkspace& s = ws ? *ws : local;
    s.input = d;

    s.head_out = ImageTensor(d.height, d.width, params.head.out_ch);
    kernels::conv3x3(d.data.data(), d.height, d.width, d.channels,
                     params.head.weights.data(), params.head.bias.data(),
                     params.head.out_ch, s.head_out.data.data());

    const ImageTensor* cur = &s.head_out;
    for (int i = 0; i < 4; ++i) {
        const ConvLayer& conv = params.blocks[i];
        s.ps_out[i] = ImageTensor(cur->height * 2, cur->width * 2, cur->channels / 4);
        kernels::pixel_shuffle2(cur->data.data(), cur->height, cur->width,
                                cur->channels, s.ps_out[i].data.data());
        s.block_pre[i] =
            ImageTensor(s.ps_out[i].height, s.ps_out[i].width, conv.out_ch);
        kernels::conv3x3(s.ps_out[i].data.data(), s.ps_out[i].height,
                         s.ps_out[i].width, s.ps_out[i].channels,
                         conv.weights.data(), conv.bias.data(), conv.out_ch,
                         s.block_pre[i].data.data());
        s.block_post[i] = s.block_pre[i];
        kernels::relu(s.block_post[i].data.data(), s.block_post[i].size());
        cur = &s.block_post[i];
    }

    const int out_h = d.height * 32;
    const int out_w = d.width * 32;
    s.bilinear_out = ImageTensor(out_h, out_w, cur->channels);
    kernels::bilinear_resize(cur->data.data(), cur->height, cur->width,
                             cur->channels, out_h, out_w,
                             s.bilinear_out.data.data());

    s.tail_a_pre = ImageTensor(out_h, out_w, params.tail_a.out_ch);
    kernels::conv3x3(s.bilinear_out.data.data(), out_h, out_w,
                     s.bilinear_out.channels, params.tail_a.weights.data(),
                     params.tail_a.bias.data(), params.tail_a.out_ch,
                     s.tail_a_pre.data.data());
    s.tail_a_post = s.tail_a_pre;
    kernels::relu(s.tail_a_post.data.data(), s.tail_a_post.size());

    ImageTensor map(out_h, out_w, params.tail_b.out_ch);
    kernels::conv3x3(s.tail_a_post.data.data(), out_h, out_w,
                     s.tail_a_post.channels, params.tail_b.weights.data(),
                     params.tail_b.bias.data(), params.tail_b.out_ch,
                     map.data.data());

    if (!params.output_offset.empty()) {
        const int oc = map.channels;
#pragma omp parallel for schedule(static)
        for (int y = 0; y < map.height; ++y) {
            double* row = map.row(y);
            for (int x = 0; x < map.width; ++x)
                for (int c = 0; c < oc; ++c) row[x * oc + c] += params.output_offset[c];
        }
    }
    return map;
}

CnnGrads cnn_backward(const ImageTensor& upstream, const CnnParams& params,
                      const CnnWorkspace& ws) {
    const int out_h = ws.tail_a_post.height;
    const int out_w = ws.tail_a_post.width;
    if (upstream.height != out_h || upstream.width != out_w ||
        upstream.channels != params.tail_b.out_ch)
        throw std::invalid_argument("cnn_backward: upstream shape mismatch");

    CnnGrads g;
    g.tail_b = ConvLayer::zeros(params.tail_b.in_ch, params.tail_b.out_ch);
    g.tail_a = ConvLayer::zeros(params.tail_a.in_ch, params.tail_a.out_ch);
    for (int i = 0; i < 4; ++i)
        g.blocks[i] = ConvLayer::zeros(params.blocks[i].in_ch, params.blocks[i].out_ch);
    g.head = ConvLayer::zeros(params.head.in_ch, params.head.out_ch);

    // The constant output offset adds nothing to any gradient.
    kernels::conv3x3_grad_params(ws.tail_a_post.data.data(), upstream.data.data(),
                                 out_h, out_w, params.tail_b.in_ch,
                                 params.tail_b.out_ch, g.tail_b.weights.data(),
                                 g.tail_b.bias.data());
    ImageTensor grad(out_h, out_w, params.tail_b.in_ch);
    kernels::conv3x3_grad_input(upstream.data.data(), out_h, out_w,
                                params.tail_b.out_ch, params.tail_b.weights.data(),
                                params.tail_b.in_ch, grad.data.data());

    kernels::relu_grad(ws.tail_a_pre.data.data(), grad.data.data(), grad.size());
    kernels::conv3x3_grad_params(ws.bilinear_out.data.data(), grad.data.data(), out_h,
                                 out_w, params.tail_a.in_ch, params.tail_a.out_ch,
                                 g.tail_a.weights.data(), g.tail_a.bias.data());
    ImageTensor grad_bilin(out_h, out_w, params.tail_a.in_ch);
    kernels::conv3x3_grad_input(grad.data.data(), out_h, out_w, params.tail_a.out_ch,
                                params.tail_a.weights.data(), params.tail_a.in_ch,
                                grad_bilin.data.data());

    const ImageTensor& last_post = ws.block_post[3];
    ImageTensor cur_grad(last_post.height, last_post.width, last_post.channels);
    kernels::bilinear_resize_grad(grad_bilin.data.data(), out_h, out_w,
                                  last_post.channels, last_post.height,
                                  last_post.width, cur_grad.data.data());

    for (int i = 3; i >= 0; --i) {
        const ConvLayer& conv = params.blocks[i];
        kernels::relu_grad(ws.block_pre[i].data.data(), cur_grad.data.data(),
                           cur_grad.size());
        kernels::conv3x3_grad_params(ws.ps_out[i].data.data(), cur_grad.data.data(),
                                     cur_grad.height, cur_grad.width, conv.in_ch,
                                     conv.out_ch, g.blocks[i].weights.data(),
                                     g.blocks[i].bias.data());
        ImageTensor grad_ps(cur_grad.height, cur_grad.width, conv.in_ch);
        kernels::conv3x3_grad_input(cur_grad.data.data(), cur_grad.height,
                                    cur_grad.width, conv.out_ch, conv.weights.data(),
                                    conv.in_ch, grad_ps.data.data());
        const ImageTensor& ps_in = i == 0 ? ws.head_out : ws.block_post[i - 1];
        ImageTensor next_grad(ps_in.height, ps_in.width, ps_in.channels);
        kernels::pixel_shuffle2_grad(grad_ps.data.data(), ps_in.height, ps_in.width,
                                     ps_in.channels, next_grad.data.data());
        cur_grad = std::move(next_grad);
    }

    kernels::conv3x3_grad_params(ws.input.data.data(), cur_grad.data.data(),
                                 cur_grad.height, cur_grad.width, params.head.in_ch,
                                 params.head.out_ch, g.head.weights.data(),
                                 g.head.bias.data());
    g.input_grad = ImageTensor(ws.input.height, ws.input.width, params.head.in_ch);
    kernels::conv3x3_grad_input(cur_grad.data.data(), cur_grad.height, cur_grad.width,
                                params.head.out_ch, params.head.weights.data(),
                                params.head.in_ch, g.input_grad.data.data());
    return g;
}

namespace {

constexpr uint32_t kCheckpointMagic = 0x43415343;  // "CSAC"
constexpr uint32_t kCheckpointVersion = 1;

template <typename T>
void write_pod(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw SchemaError("truncated checkpoint");
    return v;
}

void write_tensor(std::ostream& out, const std::vector<double>& v) {
    write_pod<uint64_t>(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_tensor(std::istream& in, std::vector<double>& v, size_t expected) {
    const auto n = read_pod<uint64_t>(in);
    if (n != expected)
        throw SchemaError("checkpoint tensor has length " + std::to_string(n) +
                          ", expected " + std::to_string(expected));
    v.resize(n);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw SchemaError("truncated checkpoint tensor");
}

}  // namespace

void save_appearance_checkpoint(const std::filesystem::path& path,
                                const CnnParams& params,
                                const std::vector<std::vector<double>>& embeddings) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    write_pod(f, kCheckpointMagic);
    write_pod(f, kCheckpointVersion);
    write_pod<uint32_t>(f, static_cast<uint32_t>(params.mode));
    write_pod<uint32_t>(f, static_cast<uint32_t>(params.embed_dim));
    write_pod<uint32_t>(f, static_cast<uint32_t>(params.head.out_ch));
    write_pod<uint64_t>(f, embeddings.size());
    const auto dump = [&](const ConvLayer& l) {
        write_tensor(f, l.weights);
        write_tensor(f, l.bias);
    };
    dump(params.head);
    for (const auto& b : params.blocks) dump(b);
    dump(params.tail_a);
    dump(params.tail_b);
    write_tensor(f, params.output_offset);
    for (const auto& e : embeddings) write_tensor(f, e);
    if (!f) throw IoError("short write to " + path.string());
}

AppearanceCheckpoint load_appearance_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    if (read_pod<uint32_t>(f) != kCheckpointMagic)
        throw SchemaError(path.string() + " is not an appearance checkpoint");
    const auto version = read_pod<uint32_t>(f);
    if (version != kCheckpointVersion)
        throw SchemaError("unsupported checkpoint version " + std::to_string(version));
    const auto mode = static_cast<TransformMode>(read_pod<uint32_t>(f));
    const auto embed_dim = static_cast<int>(read_pod<uint32_t>(f));
    const auto head_channels = static_cast<int>(read_pod<uint32_t>(f));
    const auto n_views = read_pod<uint64_t>(f);

    AppearanceCheckpoint ck;
    ck.params = make_cnn(embed_dim, mode, /*seed=*/0, /*identity_output=*/false,
                         head_channels);
    const auto slurp = [&](ConvLayer& l) {
        read_tensor(f, l.weights, l.weights.size());
        read_tensor(f, l.bias, l.bias.size());
    };
    slurp(ck.params.head);
    for (auto& b : ck.params.blocks) slurp(b);
    slurp(ck.params.tail_a);
    slurp(ck.params.tail_b);
    read_tensor(f, ck.params.output_offset,
                static_cast<size_t>(transform_out_channels(mode)));
    ck.embeddings.resize(n_views);
    for (auto& e : ck.embeddings) read_tensor(f, e, static_cast<size_t>(embed_dim));
    return ck;
}

}  // namespace cellsplat
