#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dress/net.hpp"

namespace dress {

/// Row reshape of one sampled layer: one row per output channel/filter,
/// flat weight index = row * row_size + column (a bijection by layout).
struct RowView {
    int layer = -1;
    std::size_t rows = 0;      // H
    std::size_t row_size = 0;  // N
};

RowView reshape_rows(const NetworkSpec& net, int layer);

/// Overall levels plus per-layer allocations. row_counts[k][i] is the
/// per-row nonzero count of sampled layer i (indexed by position in
/// net.sampled_layers()) at level k; layer_sparsity mirrors it as fractions.
struct SparsityLadder {
    std::vector<double> levels;  // s_1 < ... < s_K
    std::vector<std::vector<std::size_t>> row_counts;
    std::vector<std::vector<double>> layer_sparsity;

    std::size_t num_levels() const { return levels.size(); }
};

void validate_levels(const std::vector<double>& levels);

/// Per-row magnitude selection: mask k keeps the counts[k] largest-magnitude
/// weights of each row, ties broken by lower column index. Nesting holds by
/// construction since counts are non-increasing. Entries where support is 0
/// are never selected (used when sampling inside a previous subnet or a
/// complement).
std::vector<std::vector<std::uint8_t>> sample_rows(const Tensor& weights, const RowView& view,
                                                   const std::vector<std::size_t>& counts,
                                                   const std::vector<std::uint8_t>* support =
                                                       nullptr);

/// Global magnitude sort over all sampled layers: the top (1-s_k)*I weights
/// form level k's budget; per-layer budgets become row-uniform counts by
/// round-half-up, clamped to [0, N_l] and repaired to be non-increasing in k.
SparsityLadder allocate_layerwise(const NetworkSpec& net, const ParamStore& params,
                                  const std::vector<double>& levels,
                                  const std::vector<std::vector<std::uint8_t>>* support = nullptr);

/// Samples all K levels for every sampled layer from current weights.
MaskSet sample_mask_set(const NetworkSpec& net, const ParamStore& params,
                        const SparsityLadder& ladder,
                        const std::vector<std::vector<std::uint8_t>>* support = nullptr);

/// t_k = magnitude of the ((1-s_k)*I)-th largest absolute weight over all
/// sampled layers (the non-row global variant).
std::vector<double> global_thresholds(const NetworkSpec& net, const ParamStore& params,
                                      const std::vector<double>& levels);

/// Stall detector for layer-wise re-allocation: snapshot on strict
/// improvement of the epoch validation average, re-allocate otherwise.
class ReallocationPolicy {
  public:
    enum class Action { Snapshot, Reallocate };

    Action on_epoch(double avg_val_acc) {
        if (avg_val_acc > best_) {
            best_ = avg_val_acc;
            return Action::Snapshot;
        }
        return Action::Reallocate;
    }

    double best() const { return best_; }

  private:
    double best_ = -1e300;
};

/// JSON audit dump: layer name -> per-level row counts.
std::string allocation_to_json(const NetworkSpec& net, const SparsityLadder& ladder);

}  // namespace dress
