#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "dress/error.hpp"
#include "dress/net.hpp"
#include "dress/tensor.hpp"

namespace dress {

enum class Mode { Train, Eval };

/// Activation record produced by forward(); consumed by backward().
template <typename S>
struct ForwardCacheT {
    Mode mode = Mode::Train;
    std::uint64_t param_version = 0;
    // acts[0] is the input batch, acts[i+1] the output of layer i.
    std::vector<TensorT<S>> acts;
    // Masked (effective) weights actually used per conv/fc layer; empty when
    // the layer has no weights.
    std::vector<TensorT<S>> eff_weight;
    // Per conv layer: im2col patch matrix (ic*k*k, B*oh*ow).
    std::vector<TensorT<S>> col;
    // Per batch-norm layer: normalized input and per-channel 1/sqrt(var+eps).
    std::vector<TensorT<S>> bn_xhat;
    std::vector<std::vector<S>> bn_invstd;
};

using ForwardCache = ForwardCacheT<float>;

namespace detail {

template <typename S>
using MatRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using MapM = Eigen::Map<MatRM<S>>;
template <typename S>
using CMapM = Eigen::Map<const MatRM<S>>;

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;

template <typename S>
void im2col(const TensorT<S>& x, const LayerSpec& l, std::size_t oh, std::size_t ow,
            TensorT<S>& col) {
    const std::size_t b_count = x.extent(0);
    const std::size_t ic = x.extent(1), ih = x.extent(2), iw = x.extent(3);
    const std::size_t kd = ic * l.kernel * l.kernel;
    const std::size_t patches = b_count * oh * ow;
    col = TensorT<S>({kd, patches});
    for (std::size_t b = 0; b < b_count; ++b) {
        const S* xb = x.data.data() + b * ic * ih * iw;
        for (std::size_t c = 0; c < ic; ++c) {
            const S* xc = xb + c * ih * iw;
            for (int ky = 0; ky < l.kernel; ++ky) {
                for (int kx = 0; kx < l.kernel; ++kx) {
                    const std::size_t row = (c * l.kernel + ky) * l.kernel + kx;
                    S* crow = col.data.data() + row * patches + b * oh * ow;
                    for (std::size_t oy = 0; oy < oh; ++oy) {
                        const long iy = static_cast<long>(oy) * l.stride - l.padding + ky;
                        for (std::size_t ox = 0; ox < ow; ++ox) {
                            const long ix = static_cast<long>(ox) * l.stride - l.padding + kx;
                            S v = S(0);
                            if (iy >= 0 && iy < static_cast<long>(ih) && ix >= 0 &&
                                ix < static_cast<long>(iw))
                                v = xc[static_cast<std::size_t>(iy) * iw +
                                       static_cast<std::size_t>(ix)];
                            crow[oy * ow + ox] = v;
                        }
                    }
                }
            }
        }
    }
}

template <typename S>
void col2im(const TensorT<S>& col, const LayerSpec& l, std::size_t oh, std::size_t ow,
            TensorT<S>& dx) {
    const std::size_t b_count = dx.extent(0);
    const std::size_t ic = dx.extent(1), ih = dx.extent(2), iw = dx.extent(3);
    const std::size_t patches = b_count * oh * ow;
    for (std::size_t b = 0; b < b_count; ++b) {
        S* xb = dx.data.data() + b * ic * ih * iw;
        for (std::size_t c = 0; c < ic; ++c) {
            S* xc = xb + c * ih * iw;
            for (int ky = 0; ky < l.kernel; ++ky) {
                for (int kx = 0; kx < l.kernel; ++kx) {
                    const std::size_t row = (c * l.kernel + ky) * l.kernel + kx;
                    const S* crow = col.data.data() + row * patches + b * oh * ow;
                    for (std::size_t oy = 0; oy < oh; ++oy) {
                        const long iy = static_cast<long>(oy) * l.stride - l.padding + ky;
                        if (iy < 0 || iy >= static_cast<long>(ih)) continue;
                        for (std::size_t ox = 0; ox < ow; ++ox) {
                            const long ix = static_cast<long>(ox) * l.stride - l.padding + kx;
                            if (ix < 0 || ix >= static_cast<long>(iw)) continue;
                            xc[static_cast<std::size_t>(iy) * iw + static_cast<std::size_t>(ix)] +=
                                crow[oy * ow + ox];
                        }
                    }
                }
            }
        }
    }
}

}  // namespace detail

/// Runs the network on a batch. The leading batch axis is implicit: batch
/// shape is {B} + net.input_shape. A mask (per-layer weight masks for one
/// sparsity level) zeroes weights before use, which is bitwise identical to
/// forwarding a copy with those weights zeroed. In train mode batch-norm
/// uses batch statistics and updates running stats (unless
/// update_running_stats is false); in eval mode it uses running stats.
template <typename S>
TensorT<S> forward(const NetworkSpec& net, ParamStoreT<S>& params, const LayerMasks* mask,
                   const TensorT<S>& batch, Mode mode, ForwardCacheT<S>* cache,
                   bool update_running_stats = true) {
    using namespace detail;
    const std::size_t L = net.layers.size();
    if (params.layers.size() != L) throw ShapeError("param store does not match network");
    if (batch.shape.size() != net.input_shape.size() + 1)
        throw ShapeError("batch rank does not match network input");
    for (std::size_t d = 0; d < net.input_shape.size(); ++d) {
        if (batch.shape[d + 1] != net.input_shape[d])
            throw ShapeError("batch shape does not match network input");
    }
    const std::size_t B = batch.extent(0);

    if (cache) {
        cache->mode = mode;
        cache->param_version = params.version;
        cache->acts.assign(L + 1, TensorT<S>());
        cache->eff_weight.assign(L, TensorT<S>());
        cache->col.assign(L, TensorT<S>());
        cache->bn_xhat.assign(L, TensorT<S>());
        cache->bn_invstd.assign(L, std::vector<S>());
    }

    std::vector<TensorT<S>> acts;
    acts.reserve(L + 1);
    acts.push_back(batch);

    for (std::size_t i = 0; i < L; ++i) {
        const LayerSpec& l = net.layers[i];
        LayerParamsT<S>& p = params.layers[i];
        const std::size_t in_slot = l.input == -2 ? i : static_cast<std::size_t>(l.input + 1);
        const TensorT<S>& x = acts[in_slot];
        TensorT<S> y;

        switch (l.kind) {
            case LayerKind::FullyConnected: {
                const std::size_t in = static_cast<std::size_t>(l.in_features);
                const std::size_t out = static_cast<std::size_t>(l.out_features);
                TensorT<S> w = p.weight;
                if (mask && !(*mask)[i].empty()) {
                    if ((*mask)[i].size() != w.numel())
                        throw ShapeError("mask shape mismatch at layer " + std::to_string(i));
                    for (std::size_t j = 0; j < w.numel(); ++j)
                        if (!(*mask)[i][j]) w.data[j] = S(0);
                }
                y = TensorT<S>({B, out});
                CMapM<S> xm(x.data.data(), static_cast<Eigen::Index>(B),
                            static_cast<Eigen::Index>(in));
                CMapM<S> wm(w.data.data(), static_cast<Eigen::Index>(out),
                            static_cast<Eigen::Index>(in));
                MapM<S> ym(y.data.data(), static_cast<Eigen::Index>(B),
                           static_cast<Eigen::Index>(out));
                ym.noalias() = xm * wm.transpose();
                if (!p.bias.empty()) {
                    for (std::size_t b = 0; b < B; ++b)
                        for (std::size_t o = 0; o < out; ++o) y.data[b * out + o] += p.bias[o];
                }
                if (cache) cache->eff_weight[i] = std::move(w);
                break;
            }
            case LayerKind::Conv2d: {
                const std::size_t ih = x.extent(2), iw = x.extent(3);
                const std::size_t oh = (ih + 2 * l.padding - l.kernel) / l.stride + 1;
                const std::size_t ow = (iw + 2 * l.padding - l.kernel) / l.stride + 1;
                const std::size_t oc = static_cast<std::size_t>(l.out_channels);
                const std::size_t kd = static_cast<std::size_t>(l.in_channels) * l.kernel * l.kernel;
                TensorT<S> w = p.weight;
                if (mask && !(*mask)[i].empty()) {
                    if ((*mask)[i].size() != w.numel())
                        throw ShapeError("mask shape mismatch at layer " + std::to_string(i));
                    for (std::size_t j = 0; j < w.numel(); ++j)
                        if (!(*mask)[i][j]) w.data[j] = S(0);
                }
                TensorT<S> col;
                im2col(x, l, oh, ow, col);
                const std::size_t patches = B * oh * ow;
                TensorT<S> prod({oc, patches});
                CMapM<S> wm(w.data.data(), static_cast<Eigen::Index>(oc),
                            static_cast<Eigen::Index>(kd));
                CMapM<S> cm(col.data.data(), static_cast<Eigen::Index>(kd),
                            static_cast<Eigen::Index>(patches));
                MapM<S> pm(prod.data.data(), static_cast<Eigen::Index>(oc),
                           static_cast<Eigen::Index>(patches));
                pm.noalias() = wm * cm;
                y = TensorT<S>({B, oc, oh, ow});
                for (std::size_t o = 0; o < oc; ++o) {
                    const S bval = p.bias.empty() ? S(0) : p.bias[o];
                    for (std::size_t b = 0; b < B; ++b) {
                        const S* src = prod.data.data() + o * patches + b * oh * ow;
                        S* dst = y.data.data() + (b * oc + o) * oh * ow;
                        for (std::size_t q = 0; q < oh * ow; ++q) dst[q] = src[q] + bval;
                    }
                }
                if (cache) {
                    cache->eff_weight[i] = std::move(w);
                    cache->col[i] = std::move(col);
                }
                break;
            }
            case LayerKind::BatchNorm: {
                const std::size_t c_count = static_cast<std::size_t>(l.channels);
                const std::size_t spatial = x.numel() / (B * c_count);
                y = TensorT<S>(x.shape);
                TensorT<S> xhat(x.shape);
                std::vector<S> invstd(c_count);
                const bool use_batch_stats = (mode == Mode::Train);
                for (std::size_t c = 0; c < c_count; ++c) {
                    S mean, var;
                    if (use_batch_stats) {
                        S sum = S(0);
                        for (std::size_t b = 0; b < B; ++b) {
                            const S* xs = x.data.data() + (b * c_count + c) * spatial;
                            for (std::size_t q = 0; q < spatial; ++q) sum += xs[q];
                        }
                        const S n = static_cast<S>(B * spatial);
                        mean = sum / n;
                        S sq = S(0);
                        for (std::size_t b = 0; b < B; ++b) {
                            const S* xs = x.data.data() + (b * c_count + c) * spatial;
                            for (std::size_t q = 0; q < spatial; ++q) {
                                const S d = xs[q] - mean;
                                sq += d * d;
                            }
                        }
                        var = sq / n;  // biased batch variance
                        if (update_running_stats) {
                            p.bn_mean[c] = static_cast<S>((1.0 - kBnMomentum) * p.bn_mean[c] +
                                                          kBnMomentum * mean);
                            p.bn_var[c] = static_cast<S>((1.0 - kBnMomentum) * p.bn_var[c] +
                                                         kBnMomentum * var);
                        }
                    } else {
                        mean = p.bn_mean[c];
                        var = p.bn_var[c];
                    }
                    const S is = S(1) / std::sqrt(var + static_cast<S>(kBnEps));
                    invstd[c] = is;
                    const S g = p.bn_scale[c], sft = p.bn_shift[c];
                    for (std::size_t b = 0; b < B; ++b) {
                        const S* xs = x.data.data() + (b * c_count + c) * spatial;
                        S* xh = xhat.data.data() + (b * c_count + c) * spatial;
                        S* ys = y.data.data() + (b * c_count + c) * spatial;
                        for (std::size_t q = 0; q < spatial; ++q) {
                            xh[q] = (xs[q] - mean) * is;
                            ys[q] = g * xh[q] + sft;
                        }
                    }
                }
                if (cache) {
                    cache->bn_xhat[i] = std::move(xhat);
                    cache->bn_invstd[i] = std::move(invstd);
                }
                break;
            }
            case LayerKind::Relu: {
                y = TensorT<S>(x.shape);
                for (std::size_t j = 0; j < x.numel(); ++j)
                    y.data[j] = x.data[j] > S(0) ? x.data[j] : S(0);
                break;
            }
            case LayerKind::AvgPool: {
                const std::size_t c_count = x.extent(1), ih = x.extent(2), iw = x.extent(3);
                const std::size_t oh = (ih + 2 * l.padding - l.kernel) / l.stride + 1;
                const std::size_t ow = (iw + 2 * l.padding - l.kernel) / l.stride + 1;
                y = TensorT<S>({B, c_count, oh, ow});
                const S scale = S(1) / static_cast<S>(l.kernel * l.kernel);
                for (std::size_t b = 0; b < B; ++b) {
                    for (std::size_t c = 0; c < c_count; ++c) {
                        const S* xs = x.data.data() + (b * c_count + c) * ih * iw;
                        S* ys = y.data.data() + (b * c_count + c) * oh * ow;
                        for (std::size_t oy = 0; oy < oh; ++oy) {
                            for (std::size_t ox = 0; ox < ow; ++ox) {
                                S sum = S(0);
                                for (int ky = 0; ky < l.kernel; ++ky) {
                                    const long iy =
                                        static_cast<long>(oy) * l.stride - l.padding + ky;
                                    if (iy < 0 || iy >= static_cast<long>(ih)) continue;
                                    for (int kx = 0; kx < l.kernel; ++kx) {
                                        const long ix =
                                            static_cast<long>(ox) * l.stride - l.padding + kx;
                                        if (ix < 0 || ix >= static_cast<long>(iw)) continue;
                                        sum += xs[static_cast<std::size_t>(iy) * iw +
                                                  static_cast<std::size_t>(ix)];
                                    }
                                }
                                ys[oy * ow + ox] = sum * scale;
                            }
                        }
                    }
                }
                break;
            }
            case LayerKind::Flatten: {
                y = x;
                y.shape = {B, x.numel() / B};
                break;
            }
            case LayerKind::ResidualAdd: {
                const TensorT<S>& src = acts[static_cast<std::size_t>(l.source + 1)];
                if (!src.same_shape(x))
                    throw ShapeError("residual-add shape mismatch at layer " + std::to_string(i));
                y = TensorT<S>(x.shape);
                for (std::size_t j = 0; j < x.numel(); ++j) y.data[j] = x.data[j] + src.data[j];
                break;
            }
        }

        if (!all_finite(y))
            throw NumericError("non-finite activation at layer " + std::to_string(i) + " (" +
                               layer_kind_name(l.kind) + ")");
        acts.push_back(std::move(y));
    }

    TensorT<S> logits = acts.back();
    if (cache) cache->acts = std::move(acts);
    return logits;
}

/// Reverse pass over a cache produced by forward() in train mode. Returns
/// dL/d(params); gradients of masked-out weights are whatever the chain rule
/// yields for the zeroed weight (the caller applies the mask).
template <typename S>
ParamStoreT<S> backward(const NetworkSpec& net, const ParamStoreT<S>& params,
                        const ForwardCacheT<S>& cache, const TensorT<S>& loss_grad) {
    using namespace detail;
    const std::size_t L = net.layers.size();
    if (cache.acts.size() != L + 1) throw Error("backward: cache not produced by forward");
    if (cache.param_version != params.version)
        throw Error("stale cache: parameters updated since forward");
    if (!loss_grad.same_shape(cache.acts.back()))
        throw ShapeError("loss gradient shape does not match logits");

    ParamStoreT<S> grads = zero_like(params);
    const std::size_t B = cache.acts[0].extent(0);

    // Gradient w.r.t. each activation; residual-add fans in additively.
    std::vector<TensorT<S>> act_grad(L + 1);
    act_grad[L] = loss_grad;

    auto accum = [](TensorT<S>& dst, const TensorT<S>& src) {
        if (dst.empty()) {
            dst = src;
        } else {
            for (std::size_t j = 0; j < src.numel(); ++j) dst.data[j] += src.data[j];
        }
    };

    for (std::size_t ii = L; ii-- > 0;) {
        const LayerSpec& l = net.layers[ii];
        const LayerParamsT<S>& p = params.layers[ii];
        const std::size_t in_slot = l.input == -2 ? ii : static_cast<std::size_t>(l.input + 1);
        const TensorT<S>& x = cache.acts[in_slot];
        const TensorT<S>& dy = act_grad[ii + 1];
        if (dy.empty()) continue;  // output feeds nothing downstream
        TensorT<S> dx;

        switch (l.kind) {
            case LayerKind::FullyConnected: {
                const std::size_t in = static_cast<std::size_t>(l.in_features);
                const std::size_t out = static_cast<std::size_t>(l.out_features);
                const TensorT<S>& w = cache.eff_weight[ii];
                dx = TensorT<S>({B, in});
                CMapM<S> dym(dy.data.data(), static_cast<Eigen::Index>(B),
                             static_cast<Eigen::Index>(out));
                CMapM<S> wm(w.data.data(), static_cast<Eigen::Index>(out),
                            static_cast<Eigen::Index>(in));
                CMapM<S> xm(x.data.data(), static_cast<Eigen::Index>(B),
                            static_cast<Eigen::Index>(in));
                MapM<S> dxm(dx.data.data(), static_cast<Eigen::Index>(B),
                            static_cast<Eigen::Index>(in));
                MapM<S> dwm(grads.layers[ii].weight.data.data(), static_cast<Eigen::Index>(out),
                            static_cast<Eigen::Index>(in));
                dxm.noalias() = dym * wm;
                dwm.noalias() = dym.transpose() * xm;
                if (!p.bias.empty()) {
                    for (std::size_t b = 0; b < B; ++b)
                        for (std::size_t o = 0; o < out; ++o)
                            grads.layers[ii].bias[o] += dy.data[b * out + o];
                }
                break;
            }
            case LayerKind::Conv2d: {
                const std::size_t ih = x.extent(2), iw = x.extent(3);
                const std::size_t oh = dy.extent(2), ow = dy.extent(3);
                const std::size_t oc = static_cast<std::size_t>(l.out_channels);
                const std::size_t kd = static_cast<std::size_t>(l.in_channels) * l.kernel * l.kernel;
                const std::size_t patches = B * oh * ow;
                // Regroup dy as (oc, B*oh*ow) to mirror the forward product.
                TensorT<S> dym_t({oc, patches});
                for (std::size_t b = 0; b < B; ++b)
                    for (std::size_t o = 0; o < oc; ++o) {
                        const S* src = dy.data.data() + (b * oc + o) * oh * ow;
                        S* dst = dym_t.data.data() + o * patches + b * oh * ow;
                        for (std::size_t q = 0; q < oh * ow; ++q) dst[q] = src[q];
                    }
                const TensorT<S>& col = cache.col[ii];
                const TensorT<S>& w = cache.eff_weight[ii];
                CMapM<S> dym(dym_t.data.data(), static_cast<Eigen::Index>(oc),
                             static_cast<Eigen::Index>(patches));
                CMapM<S> cm(col.data.data(), static_cast<Eigen::Index>(kd),
                            static_cast<Eigen::Index>(patches));
                CMapM<S> wm(w.data.data(), static_cast<Eigen::Index>(oc),
                            static_cast<Eigen::Index>(kd));
                MapM<S> dwm(grads.layers[ii].weight.data.data(), static_cast<Eigen::Index>(oc),
                            static_cast<Eigen::Index>(kd));
                dwm.noalias() = dym * cm.transpose();
                TensorT<S> dcol({kd, patches});
                MapM<S> dcm(dcol.data.data(), static_cast<Eigen::Index>(kd),
                            static_cast<Eigen::Index>(patches));
                dcm.noalias() = wm.transpose() * dym;
                dx = TensorT<S>({B, static_cast<std::size_t>(l.in_channels), ih, iw});
                col2im(dcol, l, oh, ow, dx);
                if (!p.bias.empty()) {
                    for (std::size_t o = 0; o < oc; ++o) {
                        S sum = S(0);
                        const S* row = dym_t.data.data() + o * patches;
                        for (std::size_t q = 0; q < patches; ++q) sum += row[q];
                        grads.layers[ii].bias[o] += sum;
                    }
                }
                break;
            }
            case LayerKind::BatchNorm: {
                const std::size_t c_count = static_cast<std::size_t>(l.channels);
                const std::size_t spatial = x.numel() / (B * c_count);
                const TensorT<S>& xhat = cache.bn_xhat[ii];
                const std::vector<S>& invstd = cache.bn_invstd[ii];
                dx = TensorT<S>(x.shape);
                const S n = static_cast<S>(B * spatial);
                for (std::size_t c = 0; c < c_count; ++c) {
                    S sum_dy = S(0), sum_dy_xhat = S(0);
                    for (std::size_t b = 0; b < B; ++b) {
                        const S* dys = dy.data.data() + (b * c_count + c) * spatial;
                        const S* xh = xhat.data.data() + (b * c_count + c) * spatial;
                        for (std::size_t q = 0; q < spatial; ++q) {
                            sum_dy += dys[q];
                            sum_dy_xhat += dys[q] * xh[q];
                        }
                    }
                    grads.layers[ii].bn_shift[c] += sum_dy;
                    grads.layers[ii].bn_scale[c] += sum_dy_xhat;
                    const S g = p.bn_scale[c] * invstd[c];
                    if (cache.mode == Mode::Train) {
                        const S mean_dy = sum_dy / n;
                        const S mean_dy_xhat = sum_dy_xhat / n;
                        for (std::size_t b = 0; b < B; ++b) {
                            const S* dys = dy.data.data() + (b * c_count + c) * spatial;
                            const S* xh = xhat.data.data() + (b * c_count + c) * spatial;
                            S* dxs = dx.data.data() + (b * c_count + c) * spatial;
                            for (std::size_t q = 0; q < spatial; ++q)
                                dxs[q] = g * (dys[q] - mean_dy - xh[q] * mean_dy_xhat);
                        }
                    } else {
                        for (std::size_t b = 0; b < B; ++b) {
                            const S* dys = dy.data.data() + (b * c_count + c) * spatial;
                            S* dxs = dx.data.data() + (b * c_count + c) * spatial;
                            for (std::size_t q = 0; q < spatial; ++q) dxs[q] = g * dys[q];
                        }
                    }
                }
                break;
            }
            case LayerKind::Relu: {
                dx = TensorT<S>(x.shape);
                for (std::size_t j = 0; j < x.numel(); ++j)
                    dx.data[j] = x.data[j] > S(0) ? dy.data[j] : S(0);
                break;
            }
            case LayerKind::AvgPool: {
                const std::size_t c_count = x.extent(1), ih = x.extent(2), iw = x.extent(3);
                const std::size_t oh = dy.extent(2), ow = dy.extent(3);
                dx = TensorT<S>(x.shape);
                const S scale = S(1) / static_cast<S>(l.kernel * l.kernel);
                for (std::size_t b = 0; b < B; ++b)
                    for (std::size_t c = 0; c < c_count; ++c) {
                        const S* dys = dy.data.data() + (b * c_count + c) * oh * ow;
                        S* dxs = dx.data.data() + (b * c_count + c) * ih * iw;
                        for (std::size_t oy = 0; oy < oh; ++oy)
                            for (std::size_t ox = 0; ox < ow; ++ox) {
                                const S v = dys[oy * ow + ox] * scale;
                                for (int ky = 0; ky < l.kernel; ++ky) {
                                    const long iy =
                                        static_cast<long>(oy) * l.stride - l.padding + ky;
                                    if (iy < 0 || iy >= static_cast<long>(ih)) continue;
                                    for (int kx = 0; kx < l.kernel; ++kx) {
                                        const long ix =
                                            static_cast<long>(ox) * l.stride - l.padding + kx;
                                        if (ix < 0 || ix >= static_cast<long>(iw)) continue;
                                        dxs[static_cast<std::size_t>(iy) * iw +
                                            static_cast<std::size_t>(ix)] += v;
                                    }
                                }
                            }
                    }
                break;
            }
            case LayerKind::Flatten: {
                dx = dy;
                dx.shape = x.shape;
                break;
            }
            case LayerKind::ResidualAdd: {
                dx = dy;
                accum(act_grad[static_cast<std::size_t>(l.source + 1)], dy);
                break;
            }
        }
        accum(act_grad[in_slot], dx);
    }
    return grads;
}

}  // namespace dress
