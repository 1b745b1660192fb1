#include "dress/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "dress/error.hpp"

namespace dress {

void validate_levels(const std::vector<double>& levels) {
    if (levels.empty()) throw ConfigError("sparsity ladder is empty");
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (levels[k] < 0.0 || levels[k] > 1.0)
            throw ConfigError("sparsity level outside [0, 1]");
        if (k > 0 && !(levels[k - 1] < levels[k]))
            throw ConfigError("sparsity ladder must be strictly increasing");
    }
}

RowView reshape_rows(const NetworkSpec& net, int layer) {
    const LayerSpec& l = net.layers.at(static_cast<std::size_t>(layer));
    std::size_t rows = 0;
    if (l.kind == LayerKind::FullyConnected) rows = static_cast<std::size_t>(l.out_features);
    else if (l.kind == LayerKind::Conv2d) rows = static_cast<std::size_t>(l.out_channels);
    else throw ConfigError("layer is not sampled (no weight rows)");

    const std::size_t count = net.weight_count(layer);
    if (rows == 0 || count % rows != 0)
        throw ConfigError("weight count not divisible by row count at layer " +
                          std::to_string(layer));
    return RowView{layer, rows, count / rows};
}

std::vector<std::vector<std::uint8_t>> sample_rows(const Tensor& weights, const RowView& view,
                                                   const std::vector<std::size_t>& counts,
                                                   const std::vector<std::uint8_t>* support) {
    const std::size_t n = view.row_size, h = view.rows;
    if (weights.numel() != n * h) throw ShapeError("sample_rows: weight count mismatch");
    if (support && support->size() != weights.numel())
        throw ShapeError("sample_rows: support size mismatch");
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] > n) throw ConfigError("sample_rows: count exceeds row size");
        if (k > 0 && counts[k] > counts[k - 1])
            throw ConfigError("sample_rows: counts must be non-increasing");
    }

    std::vector<std::vector<std::uint8_t>> masks(counts.size(),
                                                 std::vector<std::uint8_t>(n * h, 0));
    std::vector<std::size_t> order(n);
    for (std::size_t r = 0; r < h; ++r) {
        const float* row = weights.data.data() + r * n;
        const std::uint8_t* sup = support ? support->data() + r * n : nullptr;
        std::iota(order.begin(), order.end(), std::size_t{0});
        // Descending magnitude; excluded entries sink to the end; ties go to
        // the lower column index.
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const bool ia = !sup || sup[a], ib = !sup || sup[b];
            if (ia != ib) return ia;
            const float ma = std::fabs(row[a]), mb = std::fabs(row[b]);
            if (ma != mb) return ma > mb;
            return a < b;
        });
        std::size_t avail = n;
        if (sup) {
            avail = 0;
            for (std::size_t c = 0; c < n; ++c) avail += sup[c] ? 1 : 0;
        }
        for (std::size_t k = 0; k < counts.size(); ++k) {
            if (counts[k] > avail)
                throw ConfigError("sample_rows: count exceeds supported entries in row");
            for (std::size_t j = 0; j < counts[k]; ++j) masks[k][r * n + order[j]] = 1;
        }
    }
    return masks;
}

SparsityLadder allocate_layerwise(const NetworkSpec& net, const ParamStore& params,
                                  const std::vector<double>& levels,
                                  const std::vector<std::vector<std::uint8_t>>* support) {
    validate_levels(levels);
    const std::vector<int> sampled = net.sampled_layers();
    if (sampled.empty()) throw ConfigError("no sampled layers in network");

    // All eligible magnitudes tagged with their layer position, sorted once.
    struct Entry {
        float mag;
        std::uint32_t layer_pos;
    };
    std::vector<Entry> entries;
    std::size_t total = 0;
    std::vector<RowView> views;
    views.reserve(sampled.size());
    for (std::size_t li = 0; li < sampled.size(); ++li) {
        views.push_back(reshape_rows(net, sampled[li]));
        const Tensor& w = params.layers[static_cast<std::size_t>(sampled[li])].weight;
        total += w.numel();
        const std::vector<std::uint8_t>* sup = support ? &(*support)[li] : nullptr;
        for (std::size_t j = 0; j < w.numel(); ++j) {
            if (sup && !(*sup)[j]) continue;
            entries.push_back({std::fabs(w.data[j]), static_cast<std::uint32_t>(li)});
        }
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.mag > b.mag; });

    SparsityLadder ladder;
    ladder.levels = levels;
    ladder.row_counts.assign(levels.size(), std::vector<std::size_t>(sampled.size(), 0));
    ladder.layer_sparsity.assign(levels.size(), std::vector<double>(sampled.size(), 0.0));

    // Budgets are relative to the full weight count, clamped to what the
    // support offers. Levels ascend, so walking them in reverse visits
    // growing budgets and the sorted prefix can be consumed incrementally.
    std::vector<std::size_t> selected(sampled.size(), 0);
    std::size_t consumed = 0;
    std::vector<std::vector<std::size_t>> selected_at(levels.size());
    for (std::size_t k = levels.size(); k-- > 0;) {
        const double keep = 1.0 - levels[k];
        std::size_t budget =
            static_cast<std::size_t>(std::llround(keep * static_cast<double>(total)));
        budget = std::min(budget, entries.size());
        while (consumed < budget) {
            ++selected[entries[consumed].layer_pos];
            ++consumed;
        }
        selected_at[k] = selected;
    }

    for (std::size_t k = 0; k < levels.size(); ++k) {
        for (std::size_t li = 0; li < sampled.size(); ++li) {
            const double per_row = static_cast<double>(selected_at[k][li]) /
                                   static_cast<double>(views[li].rows);
            std::size_t cnt = static_cast<std::size_t>(std::floor(per_row + 0.5));
            cnt = std::min(cnt, views[li].row_size);
            if (k > 0) cnt = std::min(cnt, ladder.row_counts[k - 1][li]);  // monotone repair
            ladder.row_counts[k][li] = cnt;
            ladder.layer_sparsity[k][li] =
                1.0 - static_cast<double>(cnt) / static_cast<double>(views[li].row_size);
        }
    }
    return ladder;
}

MaskSet sample_mask_set(const NetworkSpec& net, const ParamStore& params,
                        const SparsityLadder& ladder,
                        const std::vector<std::vector<std::uint8_t>>* support) {
    const std::vector<int> sampled = net.sampled_layers();
    const std::size_t K = ladder.num_levels();
    MaskSet out;
    out.levels.assign(K, LayerMasks(net.layers.size()));

    for (std::size_t li = 0; li < sampled.size(); ++li) {
        const RowView view = reshape_rows(net, sampled[li]);
        std::vector<std::size_t> counts(K);
        for (std::size_t k = 0; k < K; ++k) counts[k] = ladder.row_counts[k][li];
        const std::vector<std::uint8_t>* sup = support ? &(*support)[li] : nullptr;
        auto level_masks = sample_rows(
            params.layers[static_cast<std::size_t>(sampled[li])].weight, view, counts, sup);
        for (std::size_t k = 0; k < K; ++k)
            out.levels[k][static_cast<std::size_t>(sampled[li])] = std::move(level_masks[k]);
    }
    return out;
}

std::vector<double> global_thresholds(const NetworkSpec& net, const ParamStore& params,
                                      const std::vector<double>& levels) {
    validate_levels(levels);
    std::vector<float> mags;
    for (int layer : net.sampled_layers()) {
        const Tensor& w = params.layers[static_cast<std::size_t>(layer)].weight;
        for (float v : w.data) mags.push_back(std::fabs(v));
    }
    std::sort(mags.begin(), mags.end(), std::greater<float>());

    std::vector<double> thresholds(levels.size());
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const std::size_t n = static_cast<std::size_t>(
            std::llround((1.0 - levels[k]) * static_cast<double>(mags.size())));
        thresholds[k] = n >= 1 ? static_cast<double>(mags[std::min(n, mags.size()) - 1])
                               : std::numeric_limits<double>::infinity();
    }
    return thresholds;
}

std::string allocation_to_json(const NetworkSpec& net, const SparsityLadder& ladder) {
    nlohmann::json doc;
    doc["levels"] = ladder.levels;
    const std::vector<int> sampled = net.sampled_layers();
    nlohmann::json layers = nlohmann::json::object();
    for (std::size_t li = 0; li < sampled.size(); ++li) {
        const LayerSpec& l = net.layers[static_cast<std::size_t>(sampled[li])];
        const std::string name =
            l.name.empty() ? "layer" + std::to_string(sampled[li]) : l.name;
        nlohmann::json counts = nlohmann::json::array();
        for (std::size_t k = 0; k < ladder.num_levels(); ++k)
            counts.push_back(ladder.row_counts[k][li]);
        layers[name] = counts;
    }
    doc["row_counts"] = layers;
    return doc.dump(2);
}

}  // namespace dress
