// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <vector>

#include "cellsplat/cnn.hpp"

namespace cellsplat::testing {

inline double linear_probe(const ImageTensor& t, const std::vector<double>& coeff) {
    double s = 0.0;
    for (size_t i = 0; i < t.size(); ++i) s += t.data[i] * coeff[i];
    return s;
}

/// Signature of the ReLU masks in a forward pass. Central differences are
/// only meaningful when no mask flips inside [theta-h, theta+h]; with the
/// masks fixed the loss is affine in any single parameter, so a clean probe
/// must match the analytic gradient to near machine precision.
inline uint64_t relu_mask_signature(const CnnWorkspace& ws) {
    uint64_t sig = 1469598103934665603ull;  // FNV offset
    const auto mix = [&sig](bool bit) {
        sig ^= bit ? 0x9e3779b97f4a7c15ull : 0x517cc1b727220a95ull;
        sig *= 1099511628211ull;
    };
    for (const auto& pre : ws.block_pre)
        for (double v : pre.data) mix(v > 0.0);
    for (double v : ws.tail_a_pre.data) mix(v > 0.0);
    return sig;
}

struct FdReport {
    size_t checked = 0;
    size_t failed = 0;
    size_t kink_skipped = 0;  // probes that straddled a ReLU kink at every h
    double worst_rel = 0.0;
};

/// Central finite differences of the probe loss wrt selected parameter
/// entries, compared against the analytic gradient. `indices[t]` selects
/// entries of tensor t (as listed by parameter_tensors); an empty selection
/// skips that tensor. Probes that straddle a ReLU kink shrink h up to
/// `retries` times and are counted as kink_skipped when that never
/// stabilizes.
inline FdReport fd_check_parameters(CnnParams& params, const ImageTensor& d,
                                    const std::vector<double>& coeff,
                                    const std::vector<std::vector<size_t>>& indices,
                                    double h = 1e-4, double rel_tol = 1e-3,
                                    double abs_floor = 1e-6, int retries = 3) {
    auto refs = parameter_tensors(params);

    CnnWorkspace ws;
    ImageTensor map = cnn_forward(d, params, &ws);
    ImageTensor upstream(map.height, map.width, map.channels);
    upstream.data = coeff;
    const CnnGrads grads = cnn_backward(upstream, params, ws);
    const uint64_t base_sig = relu_mask_signature(ws);

    CnnParams grad_holder = params;  // same shapes; reuse the ref machinery
    grad_holder.head = grads.head;
    grad_holder.blocks = grads.blocks;
    grad_holder.tail_a = grads.tail_a;
    grad_holder.tail_b = grads.tail_b;
    auto grad_refs = parameter_tensors(grad_holder);

    FdReport report;
    CnnWorkspace probe_ws;
    for (size_t t = 0; t < refs.size(); ++t) {
        for (size_t i : indices[t]) {
            double& p = refs[t].data[i];
            const double saved = p;
            double fd = 0.0;
            bool clean = false;
            double hh = h;
            for (int attempt = 0; attempt <= retries && !clean; ++attempt, hh *= 0.1) {
                p = saved + hh;
                const double up = linear_probe(cnn_forward(d, params, &probe_ws), coeff);
                const uint64_t sig_up = relu_mask_signature(probe_ws);
                p = saved - hh;
                const double dn = linear_probe(cnn_forward(d, params, &probe_ws), coeff);
                const uint64_t sig_dn = relu_mask_signature(probe_ws);
                p = saved;
                if (sig_up == base_sig && sig_dn == base_sig) {
                    fd = (up - dn) / (2.0 * hh);
                    clean = true;
                }
            }
            if (!clean) {
                ++report.kink_skipped;
                continue;
            }
            const double an = grad_refs[t].data[i];
            const double denom = std::max({std::abs(fd), std::abs(an), abs_floor});
            const double rel = std::abs(fd - an) / denom;
            report.worst_rel = std::max(report.worst_rel, rel);
            ++report.checked;
            if (rel > rel_tol) ++report.failed;
        }
    }
    return report;
}

/// Central finite differences of the probe loss wrt embedding entries.
/// The embedding enters through the input channels 3..3+m of d; the
/// analytic gradient is the column sum of the CNN input gradient.
inline FdReport fd_check_embedding(const CnnParams& params, const ImageTensor& small3,
                                   std::vector<double>& emb,
                                   const std::vector<double>& coeff, double h = 1e-4,
                                   double rel_tol = 1e-3, double abs_floor = 1e-6,
                                   int retries = 3) {
    const auto assemble = [&](const std::vector<double>& e) {
        ImageTensor d(small3.height, small3.width, 3 + static_cast<int>(e.size()));
        for (int y = 0; y < d.height; ++y)
            for (int x = 0; x < d.width; ++x) {
                for (int c = 0; c < 3; ++c) d.at(y, x, c) = small3.at(y, x, c);
                for (size_t k = 0; k < e.size(); ++k)
                    d.at(y, x, 3 + static_cast<int>(k)) = e[k];
            }
        return d;
    };

    CnnWorkspace ws;
    ImageTensor map = cnn_forward(assemble(emb), params, &ws);
    ImageTensor upstream(map.height, map.width, map.channels);
    upstream.data = coeff;
    const CnnGrads grads = cnn_backward(upstream, params, ws);
    const uint64_t base_sig = relu_mask_signature(ws);

    FdReport report;
    CnnWorkspace probe_ws;
    for (size_t k = 0; k < emb.size(); ++k) {
        double an = 0.0;
        for (int y = 0; y < grads.input_grad.height; ++y)
            for (int x = 0; x < grads.input_grad.width; ++x)
                an += grads.input_grad.at(y, x, 3 + static_cast<int>(k));

        const double saved = emb[k];
        double fd = 0.0;
        bool clean = false;
        double hh = h;
        for (int attempt = 0; attempt <= retries && !clean; ++attempt, hh *= 0.1) {
            emb[k] = saved + hh;
            const double up =
                linear_probe(cnn_forward(assemble(emb), params, &probe_ws), coeff);
            const uint64_t sig_up = relu_mask_signature(probe_ws);
            emb[k] = saved - hh;
            const double dn =
                linear_probe(cnn_forward(assemble(emb), params, &probe_ws), coeff);
            const uint64_t sig_dn = relu_mask_signature(probe_ws);
            emb[k] = saved;
            if (sig_up == base_sig && sig_dn == base_sig) {
                fd = (up - dn) / (2.0 * hh);
                clean = true;
            }
        }
        if (!clean) {
            ++report.kink_skipped;
            continue;
        }
        const double denom = std::max({std::abs(fd), std::abs(an), abs_floor});
        const double rel = std::abs(fd - an) / denom;
        report.worst_rel = std::max(report.worst_rel, rel);
        ++report.checked;
        if (rel > rel_tol) ++report.failed;
    }
    return report;
}

/// Index lists selecting every entry of every parameter tensor.
inline std::vector<std::vector<size_t>> all_indices(CnnParams& params) {
    std::vector<std::vector<size_t>> out;
    for (const auto& ref : parameter_tensors(params)) {
        std::vector<size_t> idx(ref.size);
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        out.push_back(std::move(idx));
    }
    return out;
}

/// Deterministic sample of `count` indices from [0, size).
inline std::vector<size_t> sample_indices(size_t size, size_t count, uint64_t seed) {
    if (count >= size) {
        std::vector<size_t> all(size);
        for (size_t i = 0; i < size; ++i) all[i] = i;
        return all;
    }
    std::mt19937_64 rng(seed);
    std::vector<size_t> out;
    out.reserve(count);
    std::uniform_int_distribution<size_t> dist(0, size - 1);
    for (size_t i = 0; i < count; ++i) out.push_back(dist(rng));
    return out;
}

}  // namespace cellsplat::testing
