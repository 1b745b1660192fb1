#pragma once

#include <cstdint>

#include "dress/dress_csr.hpp"
#include "dress/net.hpp"

namespace dress {

/// Executable subnet: one DRESS-CSR model fixed at a level plus the dense
/// backbone store for biases and non-sampled parameters. BN parameters come
/// from the level's own variant. Immutable after build; inference may run
/// concurrently on distinct batches.
struct SparseExecPlan {
    NetworkSpec net;
    ParamStore params;          // BN variant applied; sampled weights unused
    DressCsrModel model;
    std::size_t level = 0;
    std::vector<int> sampled;   // layer id -> position handled via lookup
    std::vector<int> csr_of_layer;  // -1 for non-sampled layers
};

SparseExecPlan build_plan(const NetworkSpec& net, const ParamStore& params, DressCsrModel model,
                          std::size_t level);

/// out[r][c] = sum_j values[r][j] * b[colidx[r][j]][c], accumulated in the
/// stored importance order. b is (a.cols x C) row-major.
Tensor spmm(const SubnetCsr& a, const Tensor& b, std::uint64_t* mac_counter = nullptr);

/// Sparse convolution over filter rows; equals dense conv with the masked
/// weights. input is (B, ic, ih, iw).
Tensor sparse_conv2d(const SubnetCsr& a, const Tensor& input, const LayerSpec& layer,
                     const Tensor* bias, std::uint64_t* mac_counter = nullptr);

/// Full-network eval-mode forward on the sparse path. mac_counter, when
/// given, accumulates the multiply-accumulate count actually executed.
Tensor infer(const SparseExecPlan& plan, const Tensor& batch,
             std::uint64_t* mac_counter = nullptr);

}  // namespace dress
