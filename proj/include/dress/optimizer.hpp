#pragma once

#include <cmath>
#include <numbers>

#include "dress/error.hpp"
#include "dress/net.hpp"

namespace dress {

struct SgdConfig {
    double lr = 0.1;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    bool update_bn = true;  // batch-norm scale/shift updated only when set
};

/// lr = 0.5 * lr_init * (1 + cos(pi * t / T))
inline double cosine_lr(long t, long total, double lr_init) {
    if (t < 0 || t > total || total <= 0) throw ConfigError("cosine_lr: step outside [0, T]");
    return 0.5 * lr_init * (1.0 + std::cos(std::numbers::pi * static_cast<double>(t) /
                                           static_cast<double>(total)));
}

/// One Nesterov SGD step. Weight decay applies to conv/fc weights only (the
/// dense backbone), never to biases or batch-norm parameters; the mask does
/// not gate it. update_mask, when given, restricts weight updates (and their
/// velocity) to positions where the mask is 1.
template <typename S>
void sgd_step(const NetworkSpec& net, ParamStoreT<S>& params, const ParamStoreT<S>& grads,
              ParamStoreT<S>& velocity, const SgdConfig& cfg,
              const LayerMasks* update_mask = nullptr) {
    const S lr = static_cast<S>(cfg.lr);
    const S mu = static_cast<S>(cfg.momentum);
    const S wd = static_cast<S>(cfg.weight_decay);

    auto nesterov = [&](TensorT<S>& w, const TensorT<S>& g, TensorT<S>& v, S decay,
                        const std::vector<std::uint8_t>* gate) {
        for (std::size_t j = 0; j < w.numel(); ++j) {
            if (gate && !(*gate)[j]) continue;
            const S gj = g.data[j] + decay * w.data[j];
            v.data[j] = mu * v.data[j] + gj;
            w.data[j] -= lr * (gj + mu * v.data[j]);
        }
    };

    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        LayerParamsT<S>& p = params.layers[i];
        const LayerParamsT<S>& g = grads.layers[i];
        LayerParamsT<S>& v = velocity.layers[i];
        switch (net.layers[i].kind) {
            case LayerKind::FullyConnected:
            case LayerKind::Conv2d: {
                const std::vector<std::uint8_t>* gate =
                    (update_mask && !(*update_mask)[i].empty()) ? &(*update_mask)[i] : nullptr;
                nesterov(p.weight, g.weight, v.weight, wd, gate);
                if (!p.bias.empty()) nesterov(p.bias, g.bias, v.bias, S(0), nullptr);
                if (!all_finite(p.weight) || !all_finite(p.bias))
                    throw NumericError("non-finite update at layer " + std::to_string(i));
                break;
            }
            case LayerKind::BatchNorm: {
                if (!cfg.update_bn) break;
                nesterov(p.bn_scale, g.bn_scale, v.bn_scale, S(0), nullptr);
                nesterov(p.bn_shift, g.bn_shift, v.bn_shift, S(0), nullptr);
                if (!all_finite(p.bn_scale) || !all_finite(p.bn_shift))
                    throw NumericError("non-finite update at layer " + std::to_string(i));
                break;
            }
            default:
                break;
        }
    }
    ++params.version;
}

}  // namespace dress
