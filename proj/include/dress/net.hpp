#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dress/tensor.hpp"

namespace dress {

enum class LayerKind {
    FullyConnected,
    Conv2d,
    BatchNorm,
    Relu,
    AvgPool,
    Flatten,
    ResidualAdd,
};

const char* layer_kind_name(LayerKind k);

struct LayerSpec {
    LayerKind kind{};
    std::string name;

    // fully-connected
    int in_features = 0;
    int out_features = 0;

    // conv2d
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 0;
    int stride = 1;
    int padding = 0;

    // batch-norm
    int channels = 0;

    // residual-add: index of the layer whose output is added (-1 = network input)
    int source = -1;

    // Which activation this layer consumes: -2 = previous layer (default),
    // -1 = network input, otherwise the index of an earlier layer. Lets
    // shortcut branches (e.g. downsample convs) hang off the block input.
    int input = -2;

    bool has_bias = false;

    static LayerSpec fc(int in, int out, std::string name = "", bool bias = true);
    static LayerSpec conv(int in_c, int out_c, int k, int stride = 1, int padding = 0,
                          std::string name = "", bool bias = false);
    static LayerSpec batchnorm(int channels, std::string name = "");
    static LayerSpec relu(std::string name = "");
    static LayerSpec avgpool(int k, int stride = 0, int padding = 0, std::string name = "");
    static LayerSpec flatten(std::string name = "");
    static LayerSpec residual_add(int source, std::string name = "");
};

struct NetworkSpec {
    std::vector<LayerSpec> layers;
    std::vector<std::size_t> input_shape;  // per-sample: {C,H,W} or {F}
    int num_classes = 0;

    // Per-layer output shape (per-sample, no batch axis); also validates the spec.
    std::vector<std::vector<std::size_t>> activation_shapes() const;

    void validate() const { (void)activation_shapes(); }

    // Indices of conv/fc layers, the ones eligible for sampling.
    std::vector<int> sampled_layers() const;

    std::size_t weight_count(int layer) const;
};

template <typename S>
struct LayerParamsT {
    TensorT<S> weight;    // conv: (oc,ic,k,k); fc: (out,in)
    TensorT<S> bias;      // (out) when present
    TensorT<S> bn_scale;  // batch-norm only
    TensorT<S> bn_shift;
    TensorT<S> bn_mean;  // running statistics
    TensorT<S> bn_var;
};

/// Parameter container aligned with NetworkSpec layers. Also serves as a
/// gradient/velocity container (same structure, accumulator semantics).
template <typename S>
struct ParamStoreT {
    std::vector<LayerParamsT<S>> layers;
    std::uint64_t version = 0;  // bumped by optimizer steps; stale-cache detection

    template <typename T>
    ParamStoreT<T> cast() const {
        ParamStoreT<T> out;
        out.version = version;
        out.layers.resize(layers.size());
        for (std::size_t i = 0; i < layers.size(); ++i) {
            out.layers[i].weight = layers[i].weight.template cast<T>();
            out.layers[i].bias = layers[i].bias.template cast<T>();
            out.layers[i].bn_scale = layers[i].bn_scale.template cast<T>();
            out.layers[i].bn_shift = layers[i].bn_shift.template cast<T>();
            out.layers[i].bn_mean = layers[i].bn_mean.template cast<T>();
            out.layers[i].bn_var = layers[i].bn_var.template cast<T>();
        }
        return out;
    }
};

using ParamStore = ParamStoreT<float>;
using GradStore = ParamStore;

/// He-normal weight init, zero biases, identity batch-norm.
ParamStore init_params(const NetworkSpec& net, std::uint64_t seed);

/// Zero-filled store shaped like the network's parameters.
template <typename S>
ParamStoreT<S> zero_like(const ParamStoreT<S>& p) {
    ParamStoreT<S> out;
    out.layers.resize(p.layers.size());
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        out.layers[i].weight = TensorT<S>(p.layers[i].weight.shape);
        out.layers[i].bias = TensorT<S>(p.layers[i].bias.shape);
        out.layers[i].bn_scale = TensorT<S>(p.layers[i].bn_scale.shape);
        out.layers[i].bn_shift = TensorT<S>(p.layers[i].bn_shift.shape);
        out.layers[i].bn_mean = TensorT<S>(p.layers[i].bn_mean.shape);
        out.layers[i].bn_var = TensorT<S>(p.layers[i].bn_var.shape);
    }
    return out;
}

/// Per-layer binary masks over weight tensors for one sparsity level.
/// Empty vector for layers without a mask (non-sampled layers).
using LayerMasks = std::vector<std::vector<std::uint8_t>>;

/// K nested mask levels, levels[k][layer][flat weight index].
struct MaskSet {
    std::vector<LayerMasks> levels;

    std::size_t num_levels() const { return levels.size(); }
};

/// Checks the nesting constraint m_i ⊙ m_j = m_j for all i < j. Exact.
bool masks_nested(const MaskSet& masks);

}  // namespace dress
