#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dress/net.hpp"
#include "dress/sampling.hpp"

namespace dress {

/// Nested CSR tables of one sampled layer. Each row of the index/value
/// tables is ordered by descending weight magnitude so that for every level
/// k the first prefix_counts[k] entries of a row are exactly the support of
/// mask k.
struct DressCsrLayer {
    std::string name;
    std::uint32_t layer_id = 0;  // index into the NetworkSpec layer list
    std::uint32_t rows = 0;      // H
    std::uint32_t row_size = 0;  // N
    std::vector<std::uint32_t> prefix_counts;  // K entries, non-increasing
    std::vector<std::uint32_t> col_indices;    // rows * prefix_counts[0]
    std::vector<float> values;                 // same layout

    std::size_t row_stride() const { return prefix_counts.empty() ? 0 : prefix_counts[0]; }
};

/// Per-level batch-norm parameter sets (post-training output). Aligned with
/// the network's batch-norm layers in order.
struct BnVariant {
    std::vector<Tensor> scale, shift, mean, var;
};

struct DressCsrModel {
    std::uint32_t num_levels = 0;
    std::vector<DressCsrLayer> layers;     // aligned with net.sampled_layers()
    std::vector<BnVariant> bn_variants;    // size num_levels (may hold empty tensors)
};

/// Standard-CSR view of one level: row pointers are implicit (uniform stride
/// nnz_per_row); indices/values are O(1) slices of the full tables.
struct SubnetCsr {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t nnz_per_row = 0;
    std::size_t row_stride = 0;  // nnz of the full (level-1) table
    const std::uint32_t* col_indices = nullptr;
    const float* values = nullptr;

    const std::uint32_t* row_cols(std::size_t r) const { return col_indices + r * row_stride; }
    const float* row_vals(std::size_t r) const { return values + r * row_stride; }
};

/// Builds the nested tables from trained weights and nested row-uniform
/// masks. Extracting level k and densifying reproduces w ⊙ m_k exactly.
DressCsrModel build_dress_csr(const NetworkSpec& net, const ParamStore& params,
                              const MaskSet& masks);

/// level is zero-based (0 = lowest sparsity, full tables).
SubnetCsr extract_subnet(const DressCsrLayer& layer, std::size_t level);

/// Scatters a subnet back to the dense row-major weight tensor.
Tensor densify(const SubnetCsr& csr);

/// Replaces the model's BN variant for one level.
void set_bn_variant(DressCsrModel& model, std::size_t level, BnVariant variant);

/// Shared-BN variants copied from a parameter store, one per level.
std::vector<BnVariant> shared_bn_variants(const NetworkSpec& net, const ParamStore& params,
                                          std::size_t num_levels);

/// Applies a BN variant onto a parameter store.
void apply_bn_variant(const NetworkSpec& net, ParamStore& params, const BnVariant& variant);

// File container: little-endian, magic "DRS1", version u32, K u32, layer
// count u32; per layer: name (u16 len + UTF-8), H u32, N u32, prefix u32[K],
// index width u8 (1 when N <= 256 else 2), index table, value table f32;
// then the BN section (per level, per BN layer: scale/shift/mean/var f32
// arrays, each prefixed by a u32 length); trailing CRC32 of everything
// before it.
std::vector<std::uint8_t> serialize(const DressCsrModel& model);
DressCsrModel deserialize(const std::vector<std::uint8_t>& bytes);

void save_dress_csr(const std::string& path, const DressCsrModel& model);
DressCsrModel load_dress_csr(const std::string& path);

}  // namespace dress
