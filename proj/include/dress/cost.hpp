#pragma once

#include <string>
#include <vector>

#include "dress/net.hpp"

namespace dress {

struct CostLine {
    std::string name;
    double memory_bytes = 0.0;
    double flops = 0.0;  // multiply-accumulate count, single input
};

struct CostReport {
    std::vector<CostLine> per_layer;
    double memory_bytes = 0.0;
    double flops = 0.0;
    double bn_variant_bytes = 0.0;  // per-subnet BN parameter sets, reported separately
    double aux_flops = 0.0;         // BN/relu/pool work, excluded from the headline count
};

/// Dense model: 4 bytes per trainable parameter (weights, biases, BN
/// scale/shift); FLOPs are conv/fc MACs for one input.
CostReport dense_cost(const NetworkSpec& net);

/// Sparse accounting at one level: per sampled layer nnz * (4 value bytes +
/// 1 index byte) + 4*K prefix integers. The 8-bit index accounting is kept
/// regardless of the container's on-disk index width so numbers stay
/// comparable. per_layer_nnz is indexed by position in net.sampled_layers().
CostReport sparse_cost(const NetworkSpec& net, const std::vector<std::size_t>& per_layer_nnz,
                       std::size_t num_levels);

/// FLOPs with per-layer nonzero weight counts: conv = nnz * output spatial
/// positions, fc = nnz.
double sparse_flops(const NetworkSpec& net, const std::vector<std::size_t>& per_layer_nnz);

}  // namespace dress
