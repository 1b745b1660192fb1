#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dress/dress_csr.hpp"
#include "dress/net.hpp"
#include "dress/sampling.hpp"

namespace dress {

struct Dataset;  // harness/data.hpp

/// Normalized loss weights: alpha_k = (1 - s_k)^gamma, pi_k = alpha_k / sum.
struct LossWeights {
    double gamma = 0.0;
    std::vector<double> alpha;
    std::vector<double> pi;
};

LossWeights compute_loss_weights(const std::vector<double>& levels, double gamma);

/// Scheduler-driven pruning targets: s * p^r for each scheduler fraction.
std::vector<double> pruning_sparsities(double target, const std::vector<double>& schedule);

enum class BnTrainMode {
    Shared,          // every subnet's train pass updates the shared running stats
    PerLevelFrozen,  // only the lowest-sparsity pass updates them
};

struct TrainConfig {
    double lr_init = 0.1;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    int epochs = 30;
    int pretrain_epochs = 10;
    int batch_size = 128;
    double gamma = 0.5;
    std::uint64_t seed = 0;
    std::vector<double> ladder{0.5, 0.8, 0.9};
    std::vector<double> prune_schedule{0.5, 0.8, 0.9, 0.95, 1.0};  // p^{1:R}, p^R = 1
    int finetune_epochs = 5;       // sparse fine-tuning per pruning iteration
    int bn_posttrain_epochs = 1;
    double bn_posttrain_lr = 0.01;
    BnTrainMode bn_mode = BnTrainMode::Shared;
    int cosine_log_interval = 0;   // iterations between gradient-cosine samples; 0 = off

    void validate() const;
};

struct EpochStats {
    int epoch = 0;
    std::vector<double> train_loss;   // per subnet
    std::vector<double> val_acc;      // per subnet
    double avg_val_acc = 0.0;
    bool realloc = false;
    bool snapshot = false;
};

struct RunRecord {
    std::vector<EpochStats> epochs;
    int best_epoch = -1;
    double best_avg_val_acc = 0.0;
};

/// Per-layer, per-level cosine between the masked subnet gradient and the
/// lowest-sparsity subnet's masked gradient.
struct CosineTrace {
    struct Sample {
        long iteration;
        int layer;
        int level;      // zero-based
        double value;   // in [-1, 1]; level 0 vs itself is 1
    };
    std::vector<Sample> samples;
};

struct TrainResult {
    ParamStore params;
    MaskSet masks;
    SparsityLadder ladder;
    RunRecord record;
};

/// Plain dense training (the pre-training stage).
ParamStore pretrain_dense(const NetworkSpec& net, ParamStore params, const Dataset& train,
                          const Dataset& val, const TrainConfig& cfg, RunRecord* record = nullptr);

/// One parallel-training gradient accumulation: samples nothing, takes the
/// masks as given, returns sum_k pi_k * (dL(w_k)/dw_k) ⊙ m_k plus the
/// pi-weighted bias/BN gradients. per_subnet_loss / per_subnet_grads are
/// optional outputs (grads are the masked, pi-weighted addends).
GradStore accumulate_subnet_gradients(const NetworkSpec& net, ParamStore& params,
                                      const MaskSet& masks, const std::vector<double>& pi,
                                      const Tensor& batch, const std::vector<int>& labels,
                                      BnTrainMode bn_mode,
                                      std::vector<double>* per_subnet_loss = nullptr,
                                      std::vector<GradStore>* per_subnet_grads = nullptr);

/// Parallel training of K nested subnets with weighted loss. Expects dense
/// pre-trained params. Snapshots on validation-average improvement,
/// re-allocates layer-wise sparsity on stall, returns the best snapshot.
TrainResult dress_train(const NetworkSpec& net, ParamStore params, const Dataset& train,
                        const Dataset& val, const TrainConfig& cfg,
                        CosineTrace* cosine = nullptr);

/// Fine-tunes only BN parameters of one masked subnet; every weight is
/// bit-identical before and after. tuned_out, when given, receives the full
/// tuned parameter store so callers can assert that invariant.
BnVariant bn_posttrain(const NetworkSpec& net, const ParamStore& params, const LayerMasks& mask,
                       const Dataset& train, int epochs, const TrainConfig& cfg,
                       ParamStore* tuned_out = nullptr);

/// Magnitude pruning with scheduler-driven sparsity and learning-rate
/// rewinding for subnet 1; subnets 2..K sampled from the previous support
/// without retraining.
TrainResult iterative_increased(const NetworkSpec& net, ParamStore params, const Dataset& train,
                                const Dataset& val, const TrainConfig& cfg);

/// Per-level freeze evidence from iterative_decreased: the parameters before
/// and after the level's training together with the support that had to stay
/// frozen (the previous, higher-sparsity mask).
struct FreezeProbe {
    struct Entry {
        std::size_t level;
        LayerMasks frozen_support;
        ParamStore before;
        ParamStore after;
    };
    std::vector<Entry> entries;
};

/// Iterates k = K..1; each new support is sampled from the complement of the
/// previous subnet and only the newly added weights are updated.
TrainResult iterative_decreased(const NetworkSpec& net, ParamStore params, const Dataset& train,
                                const Dataset& val, const TrainConfig& cfg,
                                FreezeProbe* probe = nullptr);

/// Eval-mode masked accuracy over a dataset.
double masked_eval_accuracy(const NetworkSpec& net, const ParamStore& params,
                            const LayerMasks* mask, const Dataset& data, int batch_size = 256);

std::string run_record_to_csv(const RunRecord& record);
std::string cosine_trace_to_csv(const CosineTrace& trace);

}  // namespace dress
