#include "dress/net.hpp"

#include <random>

#include "dress/error.hpp"

namespace dress {

const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::FullyConnected: return "fully-connected";
        case LayerKind::Conv2d: return "conv2d";
        case LayerKind::BatchNorm: return "batch-norm";
        case LayerKind::Relu: return "relu";
        case LayerKind::AvgPool: return "avg-pool";
        case LayerKind::Flatten: return "flatten";
        case LayerKind::ResidualAdd: return "residual-add";
    }
    return "?";
}

LayerSpec LayerSpec::fc(int in, int out, std::string name, bool bias) {
    LayerSpec s;
    s.kind = LayerKind::FullyConnected;
    s.in_features = in;
    s.out_features = out;
    s.has_bias = bias;
    s.name = std::move(name);
    return s;
}

LayerSpec LayerSpec::conv(int in_c, int out_c, int k, int stride, int padding, std::string name,
                          bool bias) {
    LayerSpec s;
    s.kind = LayerKind::Conv2d;
    s.in_channels = in_c;
    s.out_channels = out_c;
    s.kernel = k;
    s.stride = stride;
    s.padding = padding;
    s.has_bias = bias;
    s.name = std::move(name);
    return s;
}

LayerSpec LayerSpec::batchnorm(int channels, std::string name) {
    LayerSpec s;
    s.kind = LayerKind::BatchNorm;
    s.channels = channels;
    s.name = std::move(name);
    return s;
}

LayerSpec LayerSpec::relu(std::string name) {
    LayerSpec s;
    s.kind = LayerKind::Relu;
    s.name = std::move(name);
    return s;
}

LayerSpec LayerSpec::avgpool(int k, int stride, int padding, std::string name) {
    LayerSpec s;
    s.kind = LayerKind::AvgPool;
    s.kernel = k;
    s.stride = stride > 0 ? stride : k;
    s.padding = padding;
    s.name = std::move(name);
    return s;
}

LayerSpec LayerSpec::flatten(std::string name) {
    LayerSpec s;
    s.kind = LayerKind::Flatten;
    s.name = std::move(name);
    return s;
}

LayerSpec LayerSpec::residual_add(int source, std::string name) {
    LayerSpec s;
    s.kind = LayerKind::ResidualAdd;
    s.source = source;
    s.name = std::move(name);
    return s;
}

namespace {

std::size_t prod(const std::vector<std::size_t>& v) {
    std::size_t n = 1;
    for (auto e : v) n *= e;
    return n;
}

}  // namespace

std::vector<std::vector<std::size_t>> NetworkSpec::activation_shapes() const {
    if (input_shape.empty()) throw ConfigError("network input shape is empty");
    if (layers.empty()) throw ConfigError("network has no layers");

    std::vector<std::vector<std::size_t>> shapes;
    shapes.reserve(layers.size());

    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& l = layers[i];
        if (l.input < -2 || l.input >= static_cast<int>(i))
            throw ConfigError("layer input must reference an earlier layer");
        std::vector<std::size_t> cur =
            l.input == -2 ? (i == 0 ? input_shape : shapes[i - 1])
                          : (l.input == -1 ? input_shape
                                           : shapes[static_cast<std::size_t>(l.input)]);
        switch (l.kind) {
            case LayerKind::FullyConnected: {
                if (l.in_features <= 0 || l.out_features <= 0)
                    throw ConfigError("fc layer dims must be positive");
                if (cur.size() != 1 || cur[0] != static_cast<std::size_t>(l.in_features))
                    throw ShapeError("fc input shape mismatch at layer " + std::to_string(i));
                cur = {static_cast<std::size_t>(l.out_features)};
                break;
            }
            case LayerKind::Conv2d: {
                if (l.in_channels <= 0 || l.out_channels <= 0 || l.kernel <= 0 || l.stride <= 0)
                    throw ConfigError("conv layer dims must be positive");
                if (l.padding < 0 || l.padding >= l.kernel)
                    throw ConfigError("conv padding must be in [0, kernel)");
                if (cur.size() != 3 || cur[0] != static_cast<std::size_t>(l.in_channels))
                    throw ShapeError("conv input shape mismatch at layer " + std::to_string(i));
                const std::size_t ih = cur[1], iw = cur[2];
                if (ih + 2 * l.padding < static_cast<std::size_t>(l.kernel) ||
                    iw + 2 * l.padding < static_cast<std::size_t>(l.kernel))
                    throw ShapeError("conv kernel larger than padded input at layer " +
                                     std::to_string(i));
                const std::size_t oh = (ih + 2 * l.padding - l.kernel) / l.stride + 1;
                const std::size_t ow = (iw + 2 * l.padding - l.kernel) / l.stride + 1;
                cur = {static_cast<std::size_t>(l.out_channels), oh, ow};
                break;
            }
            case LayerKind::BatchNorm: {
                if (l.channels <= 0) throw ConfigError("batch-norm channels must be positive");
                const std::size_t c = cur[0];
                if (c != static_cast<std::size_t>(l.channels))
                    throw ShapeError("batch-norm channel mismatch at layer " + std::to_string(i));
                break;
            }
            case LayerKind::Relu:
                break;
            case LayerKind::AvgPool: {
                if (l.kernel <= 0 || l.stride <= 0)
                    throw ConfigError("avg-pool dims must be positive");
                if (l.padding < 0 || l.padding >= l.kernel)
                    throw ConfigError("avg-pool padding must be in [0, kernel)");
                if (cur.size() != 3)
                    throw ShapeError("avg-pool expects spatial input at layer " +
                                     std::to_string(i));
                if (cur[1] + 2 * l.padding < static_cast<std::size_t>(l.kernel) ||
                    cur[2] + 2 * l.padding < static_cast<std::size_t>(l.kernel))
                    throw ShapeError("avg-pool window larger than input at layer " +
                                     std::to_string(i));
                cur = {cur[0], (cur[1] + 2 * l.padding - l.kernel) / l.stride + 1,
                       (cur[2] + 2 * l.padding - l.kernel) / l.stride + 1};
                break;
            }
            case LayerKind::Flatten: {
                cur = {prod(cur)};
                break;
            }
            case LayerKind::ResidualAdd: {
                if (l.source < -1 || l.source >= static_cast<int>(i))
                    throw ConfigError("residual source must reference an earlier layer");
                const std::vector<std::size_t>& src =
                    l.source < 0 ? input_shape : shapes[static_cast<std::size_t>(l.source)];
                if (src != cur)
                    throw ShapeError("residual-add shape mismatch at layer " + std::to_string(i));
                break;
            }
        }
        shapes.push_back(cur);
    }

    // num_classes == 0 marks a headless network (single-layer test rigs,
    // feature extractors); only classifiers must end in a flat score vector.
    if (num_classes > 0 &&
        (shapes.back().size() != 1 || shapes.back()[0] != static_cast<std::size_t>(num_classes)))
        throw ShapeError("network output must be a flat vector of class scores");
    return shapes;
}

std::vector<int> NetworkSpec::sampled_layers() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].kind == LayerKind::FullyConnected || layers[i].kind == LayerKind::Conv2d)
            out.push_back(static_cast<int>(i));
    }
    return out;
}

std::size_t NetworkSpec::weight_count(int layer) const {
    const LayerSpec& l = layers.at(static_cast<std::size_t>(layer));
    if (l.kind == LayerKind::FullyConnected)
        return static_cast<std::size_t>(l.in_features) * static_cast<std::size_t>(l.out_features);
    if (l.kind == LayerKind::Conv2d)
        return static_cast<std::size_t>(l.in_channels) * static_cast<std::size_t>(l.out_channels) *
               static_cast<std::size_t>(l.kernel) * static_cast<std::size_t>(l.kernel);
    return 0;
}

ParamStore init_params(const NetworkSpec& net, std::uint64_t seed) {
    net.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> gauss(0.0f, 1.0f);

    ParamStore store;
    store.layers.resize(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& l = net.layers[i];
        LayerParamsT<float>& p = store.layers[i];
        switch (l.kind) {
            case LayerKind::FullyConnected: {
                const float std_dev = std::sqrt(2.0f / static_cast<float>(l.in_features));
                p.weight = Tensor({static_cast<std::size_t>(l.out_features),
                                   static_cast<std::size_t>(l.in_features)});
                for (auto& w : p.weight.data) w = gauss(rng) * std_dev;
                if (l.has_bias) p.bias = Tensor({static_cast<std::size_t>(l.out_features)});
                break;
            }
            case LayerKind::Conv2d: {
                const int fan_in = l.in_channels * l.kernel * l.kernel;
                const float std_dev = std::sqrt(2.0f / static_cast<float>(fan_in));
                p.weight = Tensor({static_cast<std::size_t>(l.out_channels),
                                   static_cast<std::size_t>(l.in_channels),
                                   static_cast<std::size_t>(l.kernel),
                                   static_cast<std::size_t>(l.kernel)});
                for (auto& w : p.weight.data) w = gauss(rng) * std_dev;
                if (l.has_bias) p.bias = Tensor({static_cast<std::size_t>(l.out_channels)});
                break;
            }
            case LayerKind::BatchNorm: {
                const std::size_t c = static_cast<std::size_t>(l.channels);
                p.bn_scale = Tensor({c}, 1.0f);
                p.bn_shift = Tensor({c}, 0.0f);
                p.bn_mean = Tensor({c}, 0.0f);
                p.bn_var = Tensor({c}, 1.0f);
                break;
            }
            default:
                break;
        }
    }
    return store;
}

bool masks_nested(const MaskSet& masks) {
    for (std::size_t i = 0; i + 1 < masks.levels.size(); ++i) {
        for (std::size_t j = i + 1; j < masks.levels.size(); ++j) {
            const LayerMasks& lo = masks.levels[i];
            const LayerMasks& hi = masks.levels[j];
            if (lo.size() != hi.size()) return false;
            for (std::size_t l = 0; l < lo.size(); ++l) {
                if (lo[l].size() != hi[l].size()) return false;
                for (std::size_t w = 0; w < lo[l].size(); ++w) {
                    if (hi[l][w] && !lo[l][w]) return false;
                }
            }
        }
    }
    return true;
}

}  // namespace dress
