// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/appearance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>

#include "cellsplat/error.hpp"
#include "cellsplat/kernels.hpp"

namespace cellsplat {

ImageTensor downsample(const ImageTensor& img, int factor) {
    if (factor < 1) throw std::invalid_argument("downsample factor must be >= 1");
    if (img.height == 0 || img.width == 0 || img.channels == 0)
        throw std::invalid_argument("downsample: zero-sized input");

    const int pad_b = (factor - img.height % factor) % factor;
    const int pad_r = (factor - img.width % factor) % factor;
    const ImageTensor padded = reflect_pad_bottom_right(img, pad_b, pad_r);

    ImageTensor out(padded.height / factor, padded.width / factor, img.channels);
    kernels::avgpool(padded.data.data(), padded.height, padded.width, img.channels,
                     factor, out.data.data());
    return out;
}

ImageTensor concat_embedding(const ImageTensor& img_small, std::span<const double> emb) {
    if (img_small.channels != 3)
        throw std::invalid_argument("concat_embedding expects a 3-channel image");
    const int m = static_cast<int>(emb.size());
    ImageTensor out(img_small.height, img_small.width, 3 + m);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = img_small.at(y, x, c);
            for (int k = 0; k < m; ++k) out.at(y, x, 3 + k) = emb[k];
        }
    }
    return out;
}

namespace {

double softplus(double x) {
    // log1p(exp(x)) with the large-x branch kept linear
    return x > 30.0 ? x : std::log1p(std::exp(x));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_transform_shapes(const ImageTensor& render, const ImageTensor& map,
                            TransformMode mode) {
    if (render.channels != 3)
        throw std::invalid_argument("apply_transform expects a 3-channel render");
    if (map.height != render.height || map.width != render.width)
        throw std::invalid_argument("apply_transform: map/render spatial mismatch");
    if (map.channels != transform_out_channels(mode))
        throw std::invalid_argument("apply_transform: map has " +
                                    std::to_string(map.channels) +
                                    " channels, mode needs " +
                                    std::to_string(transform_out_channels(mode)));
}

}  // namespace

ImageTensor apply_transform(const ImageTensor& render, const ImageTensor& map,
                            TransformMode mode) {
    check_transform_shapes(render, map, mode);
    ImageTensor out(render.height, render.width, 3);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < render.height; ++y) {
        for (int x = 0; x < render.width; ++x) {
            switch (mode) {
                case TransformMode::kMultiply:
                    for (int c = 0; c < 3; ++c)
                        out.at(y, x, c) = render.at(y, x, c) * map.at(y, x, c);
                    break;
                case TransformMode::kMultiplyAdd:
                    for (int c = 0; c < 3; ++c)
                        out.at(y, x, c) =
                            render.at(y, x, c) * map.at(y, x, c) + map.at(y, x, 3 + c);
                    break;
                case TransformMode::kMultiplyGamma: {
                    const double g = softplus(map.at(y, x, 3));
                    for (int c = 0; c < 3; ++c) {
                        const double base = render.at(y, x, c) * map.at(y, x, c);
                        out.at(y, x, c) = base > 0.0 ? std::pow(base, g) : 0.0;
                    }
                    break;
                }
            }
        }
    }
    return out;
}

TransformGrads apply_transform_backward(const ImageTensor& render,
                                        const ImageTensor& map, TransformMode mode,
                                        const ImageTensor& upstream) {
    check_transform_shapes(render, map, mode);
    if (upstream.height != render.height || upstream.width != render.width ||
        upstream.channels != 3)
        throw std::invalid_argument("apply_transform_backward: upstream mismatch");

    TransformGrads g;
    g.map_grad = ImageTensor(map.height, map.width, map.channels);
    g.render_grad = ImageTensor(render.height, render.width, 3);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < render.height; ++y) {
        for (int x = 0; x < render.width; ++x) {
            switch (mode) {
                case TransformMode::kMultiply:
                    for (int c = 0; c < 3; ++c) {
                        const double u = upstream.at(y, x, c);
                        g.map_grad.at(y, x, c) = u * render.at(y, x, c);
                        g.render_grad.at(y, x, c) = u * map.at(y, x, c);
                    }
                    break;
                case TransformMode::kMultiplyAdd:
                    for (int c = 0; c < 3; ++c) {
                        const double u = upstream.at(y, x, c);
                        g.map_grad.at(y, x, c) = u * render.at(y, x, c);
                        g.map_grad.at(y, x, 3 + c) = u;
                        g.render_grad.at(y, x, c) = u * map.at(y, x, c);
                    }
                    break;
                case TransformMode::kMultiplyGamma: {
                    const double pre = map.at(y, x, 3);
                    const double gma = softplus(pre);
                    double gamma_acc = 0.0;
                    for (int c = 0; c < 3; ++c) {
                        const double u = upstream.at(y, x, c);
                        const double r = render.at(y, x, c);
                        const double base = r * map.at(y, x, c);
                        if (base > 0.0) {
                            const double powed = std::pow(base, gma);
                            const double dbase = gma * std::pow(base, gma - 1.0);
                            g.map_grad.at(y, x, c) = u * dbase * r;
                            g.render_grad.at(y, x, c) = u * dbase * map.at(y, x, c);
                            gamma_acc += u * powed * std::log(base);
                        }
                    }
                    g.map_grad.at(y, x, 3) = gamma_acc * sigmoid(pre);
                    break;
                }
            }
        }
    }
    return g;
}

void LossConfig::validate() const {
    if (lambda < 0.0 || lambda > 1.0)
        throw ConfigError("loss lambda must lie in [0, 1]");
}

LossResult loss_decoupled(const ImageTensor& render, const ImageTensor& adjusted,
                          const ImageTensor& gt, const LossConfig& cfg,
                          bool with_grads) {
    cfg.validate();
    require_same_shape(render, gt, "loss_decoupled");
    require_same_shape(adjusted, gt, "loss_decoupled");

    LossResult r;
    r.l1 = mean_abs_diff(adjusted, gt);
    r.dssim = d_ssim(render, gt, cfg.ssim);
    r.loss = (1.0 - cfg.lambda) * r.l1 + cfg.lambda * r.dssim;
    if (!with_grads) return r;

    const double w = (1.0 - cfg.lambda) / static_cast<double>(adjusted.size());
    r.grad_adjusted = ImageTensor(adjusted.height, adjusted.width, adjusted.channels);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(adjusted.size()); ++i) {
        const double d = adjusted.data[i] - gt.data[i];
        r.grad_adjusted.data[i] = d > 0.0 ? w : (d < 0.0 ? -w : 0.0);
    }

    r.grad_render = ssim_grad_first(render, gt, cfg.ssim);
    // d(1 - ssim) = -d(ssim), weighted by lambda
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(r.grad_render.size()); ++i)
        r.grad_render.data[i] *= -cfg.lambda;
    return r;
}

ImageTensor appearance_map(const ImageTensor& render, std::span<const double> emb,
                           const CnnParams& params, int downsample_factor,
                           CnnWorkspace* ws) {
    const ImageTensor small = downsample(render, downsample_factor);
    const ImageTensor d = concat_embedding(small, emb);
    ImageTensor map = cnn_forward(d, params, ws);
    if (map.height != render.height || map.width != render.width)
        map = crop_top_left(map, render.height, render.width);
    return map;
}

namespace {

// Adam over a flat list of tensors; one moment pair per entry.
struct Adam {
    double lr, beta1, beta2, eps;
    int64_t t = 0;
    std::vector<std::vector<double>> m, v;

    explicit Adam(const std::vector<TensorRef>& refs, const TrainConfig& cfg)
        : lr(cfg.lr), beta1(cfg.beta1), beta2(cfg.beta2), eps(cfg.adam_eps) {
        for (const auto& r : refs) {
            m.emplace_back(r.size, 0.0);
            v.emplace_back(r.size, 0.0);
        }
    }

    void step(const std::vector<TensorRef>& params,
              const std::vector<TensorRef>& grads) {
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (size_t k = 0; k < params.size(); ++k) {
            double* p = params[k].data;
            const double* g = grads[k].data;
            double* mk = m[k].data();
            double* vk = v[k].data();
            const int64_t n = static_cast<int64_t>(params[k].size);
#pragma omp parallel for schedule(static)
            for (int64_t i = 0; i < n; ++i) {
                mk[i] = beta1 * mk[i] + (1.0 - beta1) * g[i];
                vk[i] = beta2 * vk[i] + (1.0 - beta2) * g[i] * g[i];
                const double mhat = mk[i] / bc1;
                const double vhat = vk[i] / bc2;
                p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
    }
};

}  // namespace

TrainResult train_appearance(std::span<const TrainView> views, const TrainConfig& cfg) {
    if (views.empty()) throw ConfigError("train_appearance needs at least one view");
    cfg.loss.validate();
    for (const auto& v : views) {
        require_same_shape(v.render, v.gt, "train_appearance");
        if (v.render.channels != 3)
            throw std::invalid_argument("train_appearance expects 3-channel views");
    }

    TrainResult result;
    result.params = make_cnn(cfg.embed_dim, cfg.mode, cfg.seed, cfg.identity_init);

    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> emb_init(0.0, cfg.embed_init_std);
    result.embeddings.assign(views.size(), std::vector<double>(cfg.embed_dim, 0.0));
    for (auto& e : result.embeddings)
        for (auto& x : e) x = emb_init(rng);

    // Renders are fixed, so per-view downsampled inputs and D-SSIM values
    // never change across steps.
    std::vector<ImageTensor> small(views.size());
    std::vector<double> dssim_cache(views.size());
    for (size_t i = 0; i < views.size(); ++i) {
        small[i] = downsample(views[i].render, cfg.downsample_factor);
        dssim_cache[i] = d_ssim(views[i].render, views[i].gt, cfg.loss.ssim);
    }

    auto param_refs = parameter_tensors(result.params);
    for (size_t i = 0; i < result.embeddings.size(); ++i)
        param_refs.push_back({"embedding" + std::to_string(i),
                              result.embeddings[i].data(),
                              result.embeddings[i].size()});

    CnnParams grad_store =
        make_cnn(cfg.embed_dim, cfg.mode, /*seed=*/0, /*identity_output=*/false);
    std::vector<std::vector<double>> emb_grads(views.size(),
                                               std::vector<double>(cfg.embed_dim, 0.0));

    Adam adam(param_refs, cfg);
    result.trace.reserve(cfg.steps);

    for (int step = 0; step < cfg.steps; ++step) {
        const int view = step % static_cast<int>(views.size());
        const TrainView& tv = views[view];

        const ImageTensor d = concat_embedding(small[view], result.embeddings[view]);
        CnnWorkspace ws;
        ImageTensor map = cnn_forward(d, result.params, &ws);
        const bool cropped =
            map.height != tv.render.height || map.width != tv.render.width;
        const int full_h = map.height, full_w = map.width;
        if (cropped) map = crop_top_left(map, tv.render.height, tv.render.width);

        const ImageTensor adjusted = apply_transform(tv.render, map, cfg.mode);

        const double l1 = mean_abs_diff(adjusted, tv.gt);
        const double loss =
            (1.0 - cfg.loss.lambda) * l1 + cfg.loss.lambda * dssim_cache[view];
        result.trace.push_back({step, view, loss, l1, dssim_cache[view]});

        // L1 backward -> transform -> (un)crop -> CNN -> embedding.
        ImageTensor grad_adj(adjusted.height, adjusted.width, 3);
        const double w = (1.0 - cfg.loss.lambda) / static_cast<double>(adjusted.size());
        for (size_t i = 0; i < adjusted.size(); ++i) {
            const double diff = adjusted.data[i] - tv.gt.data[i];
            grad_adj.data[i] = diff > 0.0 ? w : (diff < 0.0 ? -w : 0.0);
        }
        const TransformGrads tg =
            apply_transform_backward(tv.render, map, cfg.mode, grad_adj);

        ImageTensor map_grad_full;
        if (cropped) {
            map_grad_full = ImageTensor(full_h, full_w, tg.map_grad.channels);
            for (int y = 0; y < tg.map_grad.height; ++y)
                for (int x = 0; x < tg.map_grad.width; ++x)
                    for (int c = 0; c < tg.map_grad.channels; ++c)
                        map_grad_full.at(y, x, c) = tg.map_grad.at(y, x, c);
        } else {
            map_grad_full = tg.map_grad;
        }

        const CnnGrads cg = cnn_backward(map_grad_full, result.params, ws);

        grad_store.head = cg.head;
        grad_store.blocks = cg.blocks;
        grad_store.tail_a = cg.tail_a;
        grad_store.tail_b = cg.tail_b;
        for (auto& e : emb_grads) std::fill(e.begin(), e.end(), 0.0);
        auto& eg = emb_grads[view];
        for (int y = 0; y < cg.input_grad.height; ++y)
            for (int x = 0; x < cg.input_grad.width; ++x)
                for (int k = 0; k < cfg.embed_dim; ++k)
                    eg[k] += cg.input_grad.at(y, x, 3 + k);

        auto grad_refs = parameter_tensors(grad_store);
        for (size_t i = 0; i < emb_grads.size(); ++i)
            grad_refs.push_back({"embedding" + std::to_string(i), emb_grads[i].data(),
                                 emb_grads[i].size()});
        adam.step(param_refs, grad_refs);
    }
    return result;
}

void write_loss_trace_csv(const std::filesystem::path& path,
                          std::span<const TraceRow> trace) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f << "step,view,loss,l1,dssim\n";
    f.precision(12);
    for (const auto& row : trace)
        f << row.step << ',' << row.view << ',' << row.loss << ',' << row.l1 << ','
          << row.dssim << '\n';
}

}  // namespace cellsplat
