#include "dress/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "dress/data.hpp"
#include "dress/engine.hpp"
#include "dress/error.hpp"
#include "dress/loss.hpp"
#include "dress/optimizer.hpp"

namespace dress {

void TrainConfig::validate() const {
    if (lr_init <= 0.0) throw ConfigError("lr_init must be positive");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0,1)");
    if (epochs < 0 || pretrain_epochs < 0) throw ConfigError("epochs must be non-negative");
    if (batch_size <= 0) throw ConfigError("batch size must be positive");
    validate_levels(ladder);
    if (prune_schedule.empty() || prune_schedule.back() != 1.0)
        throw ConfigError("pruning scheduler must end at 1");
    for (std::size_t r = 0; r < prune_schedule.size(); ++r) {
        if (prune_schedule[r] <= 0.0 || prune_schedule[r] > 1.0)
            throw ConfigError("pruning scheduler fractions must be in (0,1]");
        if (r > 0 && prune_schedule[r] < prune_schedule[r - 1])
            throw ConfigError("pruning scheduler must be non-decreasing");
    }
}

LossWeights compute_loss_weights(const std::vector<double>& levels, double gamma) {
    validate_levels(levels);
    LossWeights lw;
    lw.gamma = gamma;
    lw.alpha.resize(levels.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const double keep = 1.0 - levels[k];
        if (keep == 0.0 && gamma < 0.0)
            throw ConfigError("loss weight undefined: s_k = 1 with negative gamma");
        lw.alpha[k] = std::pow(keep, gamma);
        sum += lw.alpha[k];
    }
    lw.pi.resize(levels.size());
    for (std::size_t k = 0; k < levels.size(); ++k) lw.pi[k] = lw.alpha[k] / sum;
    return lw;
}

std::vector<double> pruning_sparsities(double target, const std::vector<double>& schedule) {
    std::vector<double> out;
    out.reserve(schedule.size());
    for (double p : schedule) out.push_back(target * p);
    return out;
}

namespace {

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, int batch_size,
                                                    std::mt19937_64& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(n, start + static_cast<std::size_t>(batch_size));
        batches.emplace_back(idx.begin() + static_cast<long>(start),
                             idx.begin() + static_cast<long>(end));
    }
    return batches;
}

void mask_weight_grads(const NetworkSpec& net, GradStore& grads, const LayerMasks& mask) {
    for (int layer : net.sampled_layers()) {
        const auto& m = mask[static_cast<std::size_t>(layer)];
        if (m.empty()) continue;
        Tensor& g = grads.layers[static_cast<std::size_t>(layer)].weight;
        for (std::size_t j = 0; j < g.numel(); ++j)
            if (!m[j]) g.data[j] = 0.0f;
    }
}

void add_into(GradStore& acc, const GradStore& g) {
    for (std::size_t i = 0; i < acc.layers.size(); ++i) {
        auto add = [](Tensor& a, const Tensor& b) {
            for (std::size_t j = 0; j < a.numel(); ++j) a.data[j] += b.data[j];
        };
        add(acc.layers[i].weight, g.layers[i].weight);
        add(acc.layers[i].bias, g.layers[i].bias);
        add(acc.layers[i].bn_scale, g.layers[i].bn_scale);
        add(acc.layers[i].bn_shift, g.layers[i].bn_shift);
    }
}

void scale_tensor(Tensor& t, float s) {
    for (auto& v : t.data) v *= s;
}

// All-ones support over the sampled layers (the trivial complement).
std::vector<std::vector<std::uint8_t>> full_support(const NetworkSpec& net) {
    std::vector<std::vector<std::uint8_t>> out;
    for (int layer : net.sampled_layers())
        out.emplace_back(net.weight_count(layer), std::uint8_t{1});
    return out;
}

// Converts per-layer-id masks to the per-sampled-position support layout.
std::vector<std::vector<std::uint8_t>> support_from_mask(const NetworkSpec& net,
                                                         const LayerMasks& mask,
                                                         bool complement = false) {
    std::vector<std::vector<std::uint8_t>> out;
    for (int layer : net.sampled_layers()) {
        const auto& m = mask[static_cast<std::size_t>(layer)];
        std::vector<std::uint8_t> s(net.weight_count(layer), 1);
        if (!m.empty()) {
            for (std::size_t j = 0; j < s.size(); ++j)
                s[j] = complement ? static_cast<std::uint8_t>(!m[j]) : m[j];
        } else if (complement) {
            // complement of an empty (all-zero) mask is everything
        }
        out.push_back(std::move(s));
    }
    return out;
}

LayerMasks zero_mask(const NetworkSpec& net) {
    LayerMasks m(net.layers.size());
    for (int layer : net.sampled_layers())
        m[static_cast<std::size_t>(layer)].assign(net.weight_count(layer), 0);
    return m;
}

LayerMasks merge_masks(const LayerMasks& a, const LayerMasks& b) {
    LayerMasks out = a;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].empty()) {
            out[i] = b[i];
            continue;
        }
        for (std::size_t j = 0; j < out[i].size(); ++j)
            out[i][j] = out[i][j] || b[i][j];
    }
    return out;
}

SparsityLadder ladder_from_masks(const NetworkSpec& net, const std::vector<double>& levels,
                                 const std::vector<LayerMasks>& level_masks) {
    SparsityLadder ladder;
    ladder.levels = levels;
    const std::vector<int> sampled = net.sampled_layers();
    ladder.row_counts.assign(levels.size(), std::vector<std::size_t>(sampled.size(), 0));
    ladder.layer_sparsity.assign(levels.size(), std::vector<double>(sampled.size(), 0.0));
    for (std::size_t k = 0; k < level_masks.size(); ++k) {
        for (std::size_t li = 0; li < sampled.size(); ++li) {
            const RowView view = reshape_rows(net, sampled[li]);
            const auto& m = level_masks[k][static_cast<std::size_t>(sampled[li])];
            std::size_t cnt = 0;
            for (std::size_t c = 0; c < view.row_size; ++c) cnt += m[c] ? 1 : 0;
            ladder.row_counts[k][li] = cnt;
            ladder.layer_sparsity[k][li] =
                1.0 - static_cast<double>(cnt) / static_cast<double>(view.row_size);
        }
    }
    return ladder;
}

}  // namespace

double masked_eval_accuracy(const NetworkSpec& net, const ParamStore& params,
                            const LayerMasks* mask, const Dataset& data, int batch_size) {
    // Eval-mode forward never mutates parameters.
    ParamStore& p = const_cast<ParamStore&>(params);
    std::size_t correct = 0;
    for (std::size_t start = 0; start < data.size();
         start += static_cast<std::size_t>(batch_size)) {
        const std::size_t end =
            std::min(data.size(), start + static_cast<std::size_t>(batch_size));
        std::vector<std::size_t> idx(end - start);
        std::iota(idx.begin(), idx.end(), start);
        const Tensor batch = data.gather(idx);
        const Tensor logits = forward<float>(net, p, mask, batch, Mode::Eval, nullptr, false);
        const std::size_t C = logits.extent(1);
        for (std::size_t b = 0; b < idx.size(); ++b) {
            const float* row = logits.data.data() + b * C;
            std::size_t arg = 0;
            for (std::size_t c = 1; c < C; ++c)
                if (row[c] > row[arg]) arg = c;  // ties keep the lower class
            if (static_cast<int>(arg) == data.labels[idx[b]]) ++correct;
        }
    }
    return data.size() ? static_cast<double>(correct) / static_cast<double>(data.size()) : 0.0;
}

ParamStore pretrain_dense(const NetworkSpec& net, ParamStore params, const Dataset& train,
                          const Dataset& val, const TrainConfig& cfg, RunRecord* record) {
    cfg.validate();
    ParamStore velocity = zero_like(params);
    // Same stream constant as dress_train so the K=1, s=0 degenerate case
    // reproduces the dense baseline's batch order exactly.
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    const long iters_per_epoch =
        static_cast<long>((train.size() + cfg.batch_size - 1) / cfg.batch_size);
    const long total = std::max<long>(1, iters_per_epoch * cfg.pretrain_epochs);
    long iter = 0;

    for (int epoch = 0; epoch < cfg.pretrain_epochs; ++epoch) {
        double loss_sum = 0.0;
        long batches = 0;
        for (const auto& idx : epoch_batches(train.size(), cfg.batch_size, rng)) {
            const Tensor batch = train.gather(idx);
            const std::vector<int> labels = train.gather_labels(idx);
            ForwardCache cache;
            const Tensor logits = forward<float>(net, params, nullptr, batch, Mode::Train, &cache);
            auto [loss, grad] = cross_entropy_loss(logits, labels);
            GradStore grads = backward<float>(net, params, cache, grad);
            SgdConfig sgd{cosine_lr(iter, total, cfg.lr_init), cfg.momentum, cfg.weight_decay,
                          true};
            sgd_step<float>(net, params, grads, velocity, sgd);
            ++iter;
            loss_sum += loss;
            ++batches;
        }
        if (record) {
            EpochStats st;
            st.epoch = epoch;
            st.train_loss = {batches ? loss_sum / static_cast<double>(batches) : 0.0};
            st.val_acc = {masked_eval_accuracy(net, params, nullptr, val)};
            st.avg_val_acc = st.val_acc[0];
            record->epochs.push_back(std::move(st));
        }
    }
    return params;
}

GradStore accumulate_subnet_gradients(const NetworkSpec& net, ParamStore& params,
                                      const MaskSet& masks, const std::vector<double>& pi,
                                      const Tensor& batch, const std::vector<int>& labels,
                                      BnTrainMode bn_mode, std::vector<double>* per_subnet_loss,
                                      std::vector<GradStore>* per_subnet_grads) {
    const std::size_t K = masks.num_levels();
    if (pi.size() != K) throw ConfigError("loss weight count does not match mask levels");
    GradStore acc = zero_like(params);
    if (per_subnet_loss) per_subnet_loss->assign(K, 0.0);
    if (per_subnet_grads) per_subnet_grads->clear();

    for (std::size_t k = 0; k < K; ++k) {
        const bool update_bn_stats = bn_mode == BnTrainMode::Shared || k == 0;
        ForwardCache cache;
        const Tensor logits = forward<float>(net, params, &masks.levels[k], batch, Mode::Train,
                                             &cache, update_bn_stats);
        auto [loss, grad] = cross_entropy_loss(logits, labels);
        if (per_subnet_loss) (*per_subnet_loss)[k] = loss;
        scale_tensor(grad, static_cast<float>(pi[k]));
        GradStore g = backward<float>(net, params, cache, grad);
        mask_weight_grads(net, g, masks.levels[k]);
        add_into(acc, g);
        if (per_subnet_grads) per_subnet_grads->push_back(std::move(g));
    }
    if (per_subnet_loss && !all_finite(*per_subnet_loss))
        throw NumericError("non-finite subnet loss");
    return acc;
}

TrainResult dress_train(const NetworkSpec& net, ParamStore params, const Dataset& train,
                        const Dataset& val, const TrainConfig& cfg, CosineTrace* cosine) {
    cfg.validate();
    const std::size_t K = cfg.ladder.size();
    const std::vector<double> pi = compute_loss_weights(cfg.ladder, cfg.gamma).pi;
    const std::vector<int> sampled = net.sampled_layers();

    SparsityLadder ladder = allocate_layerwise(net, params, cfg.ladder);
    ParamStore velocity = zero_like(params);
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    ReallocationPolicy policy;

    const long iters_per_epoch =
        static_cast<long>((train.size() + cfg.batch_size - 1) / cfg.batch_size);
    const long total = std::max<long>(1, iters_per_epoch * cfg.epochs);
    long iter = 0;

    TrainResult best;
    best.params = params;
    best.ladder = ladder;
    best.masks = sample_mask_set(net, params, ladder);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<double> loss_sum(K, 0.0);
        long batches = 0;
        for (const auto& idx : epoch_batches(train.size(), cfg.batch_size, rng)) {
            const Tensor batch = train.gather(idx);
            const std::vector<int> labels = train.gather_labels(idx);

            // Masks are re-sampled from the current weights every iteration.
            const MaskSet masks = sample_mask_set(net, params, ladder);

            std::vector<double> losses;
            std::vector<GradStore> per_grads;
            const bool log_cosine =
                cosine && cfg.cosine_log_interval > 0 && iter % cfg.cosine_log_interval == 0;
            GradStore acc = accumulate_subnet_gradients(net, params, masks, pi, batch, labels,
                                                        cfg.bn_mode, &losses,
                                                        log_cosine ? &per_grads : nullptr);
            if (log_cosine) {
                for (int layer : sampled) {
                    const Tensor& g0 =
                        per_grads[0].layers[static_cast<std::size_t>(layer)].weight;
                    double n0 = 0.0;
                    for (float v : g0.data) n0 += static_cast<double>(v) * v;
                    for (std::size_t k = 0; k < K; ++k) {
                        const Tensor& gk =
                            per_grads[k].layers[static_cast<std::size_t>(layer)].weight;
                        double nk = 0.0, dot = 0.0;
                        for (std::size_t j = 0; j < gk.numel(); ++j) {
                            nk += static_cast<double>(gk.data[j]) * gk.data[j];
                            dot += static_cast<double>(gk.data[j]) * g0.data[j];
                        }
                        if (n0 <= 0.0 || nk <= 0.0) continue;  // undefined sample, excluded
                        cosine->samples.push_back(
                            {iter, layer, static_cast<int>(k), dot / std::sqrt(n0 * nk)});
                    }
                }
            }

            SgdConfig sgd{cosine_lr(iter, total, cfg.lr_init), cfg.momentum, cfg.weight_decay,
                          true};
            sgd_step<float>(net, params, acc, velocity, sgd);
            ++iter;
            for (std::size_t k = 0; k < K; ++k) loss_sum[k] += losses[k];
            ++batches;
        }

        // Per-epoch validation with freshly sampled masks.
        MaskSet masks = sample_mask_set(net, params, ladder);
        EpochStats st;
        st.epoch = epoch;
        st.train_loss.resize(K);
        st.val_acc.resize(K);
        for (std::size_t k = 0; k < K; ++k) {
            st.train_loss[k] = batches ? loss_sum[k] / static_cast<double>(batches) : 0.0;
            st.val_acc[k] = masked_eval_accuracy(net, params, &masks.levels[k], val);
            st.avg_val_acc += st.val_acc[k];
        }
        st.avg_val_acc /= static_cast<double>(K);

        if (policy.on_epoch(st.avg_val_acc) == ReallocationPolicy::Action::Snapshot) {
            st.snapshot = true;
            best.params = params;
            best.masks = masks;
            best.ladder = ladder;
            best.record.best_epoch = epoch;
            best.record.best_avg_val_acc = st.avg_val_acc;
        } else {
            st.realloc = true;
            ladder = allocate_layerwise(net, params, cfg.ladder);
        }
        best.record.epochs.push_back(std::move(st));
    }
    return best;
}

BnVariant bn_posttrain(const NetworkSpec& net, const ParamStore& params, const LayerMasks& mask,
                       const Dataset& train, int epochs, const TrainConfig& cfg,
                       ParamStore* tuned_out) {
    ParamStore tuned = params;
    ParamStore velocity = zero_like(tuned);
    std::mt19937_64 rng(cfg.seed ^ 0xb05717a1ull);
    const long iters_per_epoch =
        static_cast<long>((train.size() + cfg.batch_size - 1) / cfg.batch_size);
    const long total = std::max<long>(1, iters_per_epoch * std::max(epochs, 1));
    long iter = 0;

    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (const auto& idx : epoch_batches(train.size(), cfg.batch_size, rng)) {
            const Tensor batch = train.gather(idx);
            const std::vector<int> labels = train.gather_labels(idx);
            ForwardCache cache;
            const Tensor logits = forward<float>(net, tuned, &mask, batch, Mode::Train, &cache);
            auto [loss, grad] = cross_entropy_loss(logits, labels);
            (void)loss;
            GradStore grads = backward<float>(net, tuned, cache, grad);
            // Freeze everything except BN scale/shift.
            for (std::size_t i = 0; i < grads.layers.size(); ++i) {
                grads.layers[i].weight.fill(0.0f);
                grads.layers[i].bias.fill(0.0f);
            }
            SgdConfig sgd{cosine_lr(iter, total, cfg.bn_posttrain_lr), cfg.momentum, 0.0, true};
            sgd_step<float>(net, tuned, grads, velocity, sgd);
            ++iter;
        }
    }

    BnVariant out;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (net.layers[i].kind != LayerKind::BatchNorm) continue;
        out.scale.push_back(tuned.layers[i].bn_scale);
        out.shift.push_back(tuned.layers[i].bn_shift);
        out.mean.push_back(tuned.layers[i].bn_mean);
        out.var.push_back(tuned.layers[i].bn_var);
    }
    if (tuned_out) *tuned_out = std::move(tuned);
    return out;
}

namespace {

// Scheduler-driven sparse fine-tuning of one masked subnet: gradients and
// updates restricted to the mask, cosine schedule restarted from lr_init
// (learning-rate rewinding).
void sparse_finetune(const NetworkSpec& net, ParamStore& params, ParamStore& velocity,
                     const LayerMasks& mask, const LayerMasks& update_mask, const Dataset& train,
                     const TrainConfig& cfg, std::mt19937_64& rng,
                     std::vector<EpochStats>* record, const Dataset* val) {
    const long iters_per_epoch =
        static_cast<long>((train.size() + cfg.batch_size - 1) / cfg.batch_size);
    const long total = std::max<long>(1, iters_per_epoch * cfg.finetune_epochs);
    long iter = 0;
    for (int epoch = 0; epoch < cfg.finetune_epochs; ++epoch) {
        double loss_sum = 0.0;
        long batches = 0;
        for (const auto& idx : epoch_batches(train.size(), cfg.batch_size, rng)) {
            const Tensor batch = train.gather(idx);
            const std::vector<int> labels = train.gather_labels(idx);
            ForwardCache cache;
            const Tensor logits = forward<float>(net, params, &mask, batch, Mode::Train, &cache);
            auto [loss, grad] = cross_entropy_loss(logits, labels);
            GradStore grads = backward<float>(net, params, cache, grad);
            mask_weight_grads(net, grads, update_mask);
            SgdConfig sgd{cosine_lr(iter, total, cfg.lr_init), cfg.momentum, cfg.weight_decay,
                          true};
            sgd_step<float>(net, params, grads, velocity, sgd, &update_mask);
            ++iter;
            loss_sum += loss;
            ++batches;
        }
        if (record) {
            EpochStats st;
            st.epoch = static_cast<int>(record->size());
            st.train_loss = {batches ? loss_sum / static_cast<double>(batches) : 0.0};
            if (val) {
                st.val_acc = {masked_eval_accuracy(net, params, &mask, *val)};
                st.avg_val_acc = st.val_acc[0];
            }
            record->push_back(std::move(st));
        }
    }
}

}  // namespace

TrainResult iterative_increased(const NetworkSpec& net, ParamStore params, const Dataset& train,
                                const Dataset& val, const TrainConfig& cfg) {
    cfg.validate();
    const std::size_t K = cfg.ladder.size();
    std::mt19937_64 rng(cfg.seed ^ 0x17e7a71eull);
    ParamStore velocity = zero_like(params);

    TrainResult result;
    std::vector<LayerMasks> level_masks(K);

    // Subnet 1: traditional magnitude pruning with the scheduler.
    LayerMasks mask1;
    for (double p : cfg.prune_schedule) {
        const double target = cfg.ladder[0] * p;
        const std::vector<double> one_level{target};
        const SparsityLadder alloc = allocate_layerwise(net, params, one_level);
        mask1 = sample_mask_set(net, params, alloc).levels[0];
        sparse_finetune(net, params, velocity, mask1, mask1, train, cfg, rng,
                        &result.record.epochs, &val);
    }
    level_masks[0] = mask1;

    // Subnets 2..K: sampled from the previous support, no retraining.
    for (std::size_t k = 1; k < K; ++k) {
        const auto support = support_from_mask(net, level_masks[k - 1]);
        const SparsityLadder alloc =
            allocate_layerwise(net, params, {cfg.ladder[k]}, &support);
        level_masks[k] = sample_mask_set(net, params, alloc, &support).levels[0];
    }

    result.params = std::move(params);
    result.masks.levels = std::move(level_masks);
    result.ladder = ladder_from_masks(net, cfg.ladder, result.masks.levels);
    if (!result.record.epochs.empty()) {
        result.record.best_epoch = static_cast<int>(result.record.epochs.size()) - 1;
        result.record.best_avg_val_acc = result.record.epochs.back().avg_val_acc;
    }
    return result;
}

TrainResult iterative_decreased(const NetworkSpec& net, ParamStore params, const Dataset& train,
                                const Dataset& val, const TrainConfig& cfg, FreezeProbe* probe) {
    cfg.validate();
    const std::size_t K = cfg.ladder.size();
    std::mt19937_64 rng(cfg.seed ^ 0xdec7ea5eull);
    ParamStore velocity = zero_like(params);

    std::vector<LayerMasks> level_masks(K);
    LayerMasks prev = zero_mask(net);  // m_{K+1} = 0
    TrainResult result;

    for (std::size_t kk = K; kk-- > 0;) {
        const double s_k = cfg.ladder[kk];
        const double s_next = kk + 1 < K ? cfg.ladder[kk + 1] : 1.0;
        const ParamStore before_level = probe ? params : ParamStore{};
        LayerMasks merged;
        for (double p : cfg.prune_schedule) {
            const double added_keep = (s_next - s_k) * p;
            const double cs_sparsity = 1.0 - added_keep;
            const auto complement = support_from_mask(net, prev, /*complement=*/true);
            LayerMasks m_cs;
            if (cs_sparsity >= 1.0) {
                m_cs = zero_mask(net);
            } else {
                const SparsityLadder alloc =
                    allocate_layerwise(net, params, {cs_sparsity}, &complement);
                m_cs = sample_mask_set(net, params, alloc, &complement).levels[0];
            }
            merged = merge_masks(prev, m_cs);
            // Only the newly added support trains; everything under m_{k+1}
            // stays frozen.
            sparse_finetune(net, params, velocity, merged, m_cs, train, cfg, rng,
                            &result.record.epochs, &val);
        }
        if (probe) probe->entries.push_back({kk, prev, before_level, params});
        level_masks[kk] = merged;
        prev = merged;
    }

    result.params = std::move(params);
    result.masks.levels = std::move(level_masks);
    result.ladder = ladder_from_masks(net, cfg.ladder, result.masks.levels);
    if (!result.record.epochs.empty()) {
        result.record.best_epoch = static_cast<int>(result.record.epochs.size()) - 1;
        result.record.best_avg_val_acc = result.record.epochs.back().avg_val_acc;
    }
    return result;
}

std::string run_record_to_csv(const RunRecord& record) {
    std::ostringstream os;
    os << "epoch,subnet,loss,val_acc,avg_val_acc,realloc_flag\n";
    for (const EpochStats& st : record.epochs) {
        const std::size_t K = std::max(st.train_loss.size(), st.val_acc.size());
        for (std::size_t k = 0; k < K; ++k) {
            os << st.epoch << ',' << (k + 1) << ','
               << (k < st.train_loss.size() ? st.train_loss[k] : 0.0) << ','
               << (k < st.val_acc.size() ? st.val_acc[k] : 0.0) << ',' << st.avg_val_acc << ','
               << (st.realloc ? 1 : 0) << '\n';
        }
    }
    return os.str();
}

std::string cosine_trace_to_csv(const CosineTrace& trace) {
    std::ostringstream os;
    os << "iteration,layer,level,cosine\n";
    for (const auto& s : trace.samples)
        os << s.iteration << ',' << s.layer << ',' << (s.level + 1) << ',' << s.value << '\n';
    return os.str();
}

}  // namespace dress
