#include "dress/cost.hpp"

#include "dress/error.hpp"

namespace dress {

namespace {

std::string line_name(const NetworkSpec& net, std::size_t i) {
    const LayerSpec& l = net.layers[i];
    return l.name.empty() ? std::string(layer_kind_name(l.kind)) + std::to_string(i) : l.name;
}

}  // namespace

CostReport dense_cost(const NetworkSpec& net) {
    const auto shapes = net.activation_shapes();
    CostReport report;
    std::vector<std::size_t> cur = net.input_shape;

    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& l = net.layers[i];
        const auto& out = shapes[i];
        CostLine line{line_name(net, i), 0.0, 0.0};
        switch (l.kind) {
            case LayerKind::FullyConnected: {
                const double params = static_cast<double>(l.in_features) * l.out_features +
                                      (l.has_bias ? l.out_features : 0);
                line.memory_bytes = 4.0 * params;
                line.flops = static_cast<double>(l.in_features) * l.out_features;
                break;
            }
            case LayerKind::Conv2d: {
                const double wcount = static_cast<double>(l.in_channels) * l.out_channels *
                                      l.kernel * l.kernel;
                line.memory_bytes = 4.0 * (wcount + (l.has_bias ? l.out_channels : 0));
                line.flops = wcount * static_cast<double>(out[1] * out[2]);
                break;
            }
            case LayerKind::BatchNorm: {
                line.memory_bytes = 4.0 * 2.0 * l.channels;  // scale + shift
                double elems = 1.0;
                for (auto e : out) elems *= static_cast<double>(e);
                report.aux_flops += 2.0 * elems;
                break;
            }
            case LayerKind::Relu: {
                double elems = 1.0;
                for (auto e : out) elems *= static_cast<double>(e);
                report.aux_flops += elems;
                break;
            }
            case LayerKind::AvgPool: {
                double elems = 1.0;
                for (auto e : out) elems *= static_cast<double>(e);
                report.aux_flops += elems * l.kernel * l.kernel;
                break;
            }
            default:
                break;
        }
        report.memory_bytes += line.memory_bytes;
        report.flops += line.flops;
        report.per_layer.push_back(std::move(line));
        cur = out;
    }
    return report;
}

CostReport sparse_cost(const NetworkSpec& net, const std::vector<std::size_t>& per_layer_nnz,
                       std::size_t num_levels) {
    const auto shapes = net.activation_shapes();
    const std::vector<int> sampled = net.sampled_layers();
    if (per_layer_nnz.size() != sampled.size())
        throw ConfigError("sparse_cost: nnz list does not match sampled layers");

    CostReport report;
    for (std::size_t li = 0; li < sampled.size(); ++li) {
        const std::size_t i = static_cast<std::size_t>(sampled[li]);
        const LayerSpec& l = net.layers[i];
        const auto& out = shapes[i];
        CostLine line{line_name(net, i), 0.0, 0.0};
        line.memory_bytes = static_cast<double>(per_layer_nnz[li]) * (4.0 + 1.0) +
                            4.0 * static_cast<double>(num_levels);
        if (l.kind == LayerKind::Conv2d)
            line.flops = static_cast<double>(per_layer_nnz[li]) *
                         static_cast<double>(out[1] * out[2]);
        else
            line.flops = static_cast<double>(per_layer_nnz[li]);
        report.memory_bytes += line.memory_bytes;
        report.flops += line.flops;
        report.per_layer.push_back(std::move(line));
    }

    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (net.layers[i].kind == LayerKind::BatchNorm)
            report.bn_variant_bytes +=
                4.0 * 4.0 * net.layers[i].channels * static_cast<double>(num_levels);
    }
    return report;
}

double sparse_flops(const NetworkSpec& net, const std::vector<std::size_t>& per_layer_nnz) {
    return sparse_cost(net, per_layer_nnz, 1).flops;
}

}  // namespace dress
