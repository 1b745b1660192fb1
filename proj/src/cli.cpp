#include "dress/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dress/checkpoint.hpp"
#include "dress/cost.hpp"
#include "dress/data.hpp"
#include "dress/dress_csr.hpp"
#include "dress/error.hpp"
#include "dress/net.hpp"
#include "dress/sampling.hpp"
#include "dress/sparse_infer.hpp"
#include "dress/trainers.hpp"
#include "dress/zoo.hpp"

namespace dress {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kMetadataSchemaVersion = 1;

void reject_unknown_keys(const json& obj, const std::vector<std::string>& known,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("unknown config key '" + it.key() + "' in " + where);
    }
}

struct DataConfig {
    std::string kind = "synthetic";  // synthetic | synthetic-images | idx
    int classes = 10;
    int dim = 784;
    int train_n = 10000;
    int test_n = 2000;
    int channels = 1;
    int image_size = 28;
    std::string images, labels;
    std::string test_images, test_labels;
    double mean = 0.0, stddev = 1.0;
    double val_fraction = 0.2;
    std::uint64_t seed = 1234;
};

struct AppConfig {
    std::string arch = "mlp";
    std::vector<int> mlp_dims{784, 256, 128, 10};
    int conv_base_channels = 8;
    DataConfig data;
    TrainConfig train;
    std::string out_dir = "out";
};

void parse_data(const json& j, DataConfig& d) {
    reject_unknown_keys(j, {"kind", "classes", "dim", "train_n", "test_n", "channels",
                            "image_size", "images", "labels", "test_images", "test_labels",
                            "mean", "stddev", "val_fraction", "seed"},
                        "data");
    d.kind = j.value("kind", d.kind);
    d.classes = j.value("classes", d.classes);
    d.dim = j.value("dim", d.dim);
    d.train_n = j.value("train_n", d.train_n);
    d.test_n = j.value("test_n", d.test_n);
    d.channels = j.value("channels", d.channels);
    d.image_size = j.value("image_size", d.image_size);
    d.images = j.value("images", d.images);
    d.labels = j.value("labels", d.labels);
    d.test_images = j.value("test_images", d.test_images);
    d.test_labels = j.value("test_labels", d.test_labels);
    d.mean = j.value("mean", d.mean);
    d.stddev = j.value("stddev", d.stddev);
    d.val_fraction = j.value("val_fraction", d.val_fraction);
    d.seed = j.value("seed", d.seed);
    if (d.kind != "synthetic" && d.kind != "synthetic-images" && d.kind != "idx")
        throw ConfigError("data.kind must be synthetic, synthetic-images or idx");
}

void parse_train(const json& j, TrainConfig& t) {
    reject_unknown_keys(j, {"lr_init", "momentum", "weight_decay", "epochs", "pretrain_epochs",
                            "batch_size", "gamma", "seed", "ladder", "prune_schedule",
                            "finetune_epochs", "bn_posttrain_epochs", "bn_posttrain_lr",
                            "bn_mode", "cosine_log_interval"},
                        "train");
    t.lr_init = j.value("lr_init", t.lr_init);
    t.momentum = j.value("momentum", t.momentum);
    t.weight_decay = j.value("weight_decay", t.weight_decay);
    t.epochs = j.value("epochs", t.epochs);
    t.pretrain_epochs = j.value("pretrain_epochs", t.pretrain_epochs);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.gamma = j.value("gamma", t.gamma);
    t.seed = j.value("seed", t.seed);
    if (j.contains("ladder")) t.ladder = j["ladder"].get<std::vector<double>>();
    if (j.contains("prune_schedule"))
        t.prune_schedule = j["prune_schedule"].get<std::vector<double>>();
    t.finetune_epochs = j.value("finetune_epochs", t.finetune_epochs);
    t.bn_posttrain_epochs = j.value("bn_posttrain_epochs", t.bn_posttrain_epochs);
    t.bn_posttrain_lr = j.value("bn_posttrain_lr", t.bn_posttrain_lr);
    if (j.contains("bn_mode")) {
        const std::string m = j["bn_mode"].get<std::string>();
        if (m == "shared")
            t.bn_mode = BnTrainMode::Shared;
        else if (m == "per-level")
            t.bn_mode = BnTrainMode::PerLevelFrozen;
        else
            throw ConfigError("train.bn_mode must be 'shared' or 'per-level'");
    }
    t.cosine_log_interval = j.value("cosine_log_interval", t.cosine_log_interval);
}

json data_to_json(const DataConfig& d) {
    return json{{"kind", d.kind},        {"classes", d.classes},
                {"dim", d.dim},          {"train_n", d.train_n},
                {"test_n", d.test_n},    {"channels", d.channels},
                {"image_size", d.image_size}, {"images", d.images},
                {"labels", d.labels},    {"test_images", d.test_images},
                {"test_labels", d.test_labels}, {"mean", d.mean},
                {"stddev", d.stddev},    {"val_fraction", d.val_fraction},
                {"seed", d.seed}};
}

json train_to_json(const TrainConfig& t) {
    return json{{"lr_init", t.lr_init},
                {"momentum", t.momentum},
                {"weight_decay", t.weight_decay},
                {"epochs", t.epochs},
                {"pretrain_epochs", t.pretrain_epochs},
                {"batch_size", t.batch_size},
                {"gamma", t.gamma},
                {"seed", t.seed},
                {"ladder", t.ladder},
                {"prune_schedule", t.prune_schedule},
                {"finetune_epochs", t.finetune_epochs},
                {"bn_posttrain_epochs", t.bn_posttrain_epochs},
                {"bn_posttrain_lr", t.bn_posttrain_lr},
                {"bn_mode", t.bn_mode == BnTrainMode::Shared ? "shared" : "per-level"},
                {"cosine_log_interval", t.cosine_log_interval}};
}

json config_to_json(const AppConfig& c) {
    return json{{"schema_version", kMetadataSchemaVersion},
                {"arch", c.arch},
                {"mlp_dims", c.mlp_dims},
                {"conv_base_channels", c.conv_base_channels},
                {"data", data_to_json(c.data)},
                {"train", train_to_json(c.train)},
                {"out_dir", c.out_dir}};
}

AppConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown_keys(j, {"schema_version", "arch", "mlp_dims", "conv_base_channels", "data",
                            "train", "out_dir"},
                        "top level");
    AppConfig c;
    c.arch = j.value("arch", c.arch);
    if (j.contains("mlp_dims")) c.mlp_dims = j["mlp_dims"].get<std::vector<int>>();
    c.conv_base_channels = j.value("conv_base_channels", c.conv_base_channels);
    if (j.contains("data")) parse_data(j["data"], c.data);
    if (j.contains("train")) parse_train(j["train"], c.train);
    c.out_dir = j.value("out_dir", c.out_dir);
    return c;
}

NetworkSpec build_net(const AppConfig& c) {
    if (c.arch == "mlp") return make_mlp(c.mlp_dims);
    if (c.arch == "tinyconv")
        return make_tiny_conv(c.data.channels, c.data.image_size, c.conv_base_channels,
                              c.data.classes);
    return make_arch(c.arch);
}

struct LoadedData {
    Dataset train, val, test;
};

LoadedData load_data(const DataConfig& d) {
    LoadedData out;
    if (d.kind == "idx") {
        if (d.images.empty() || d.labels.empty())
            throw ConfigError("data.kind 'idx' needs images and labels paths");
        out.train = load_idx(d.images, d.labels, d.classes, static_cast<float>(d.mean),
                             static_cast<float>(d.stddev));
        Dataset heldout;
        if (!d.test_images.empty()) {
            heldout = load_idx(d.test_images, d.test_labels, d.classes,
                               static_cast<float>(d.mean), static_cast<float>(d.stddev));
        } else {
            auto [tr, rest] = split_val(out.train, 0.8, d.seed);
            out.train = std::move(tr);
            heldout = std::move(rest);
        }
        auto [val, test] = split_val(heldout, d.val_fraction, d.seed + 1);
        out.val = std::move(val);
        out.test = std::move(test);
    } else {
        const bool image = d.kind == "synthetic-images";
        out.train = image ? gen_synthetic_images(d.classes, d.channels, d.image_size, d.train_n,
                                                 d.seed)
                          : gen_synthetic(d.classes, d.dim, d.train_n, d.seed);
        Dataset heldout = image ? gen_synthetic_images(d.classes, d.channels, d.image_size,
                                                       d.test_n, d.seed + 1)
                                : gen_synthetic(d.classes, d.dim, d.test_n, d.seed + 1);
        auto [val, test] = split_val(heldout, d.val_fraction, d.seed + 2);
        out.val = std::move(val);
        out.test = std::move(test);
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path.string());
    os << text;
}

void write_run_outputs(const AppConfig& cfg, const std::string& subcommand,
                       const RunRecord& record, const Dataset& train) {
    fs::create_directories(cfg.out_dir);
    write_text(fs::path(cfg.out_dir) / (subcommand + "_record.csv"), run_record_to_csv(record));
    json meta{{"schema_version", kMetadataSchemaVersion},
              {"subcommand", subcommand},
              {"seed", cfg.train.seed},
              {"dataset_content_hash", dataset_content_hash(train)},
              {"config", config_to_json(cfg)}};
    write_text(fs::path(cfg.out_dir) / (subcommand + "_metadata.json"), meta.dump(2) + "\n");
}

std::vector<std::size_t> level_nnz(const NetworkSpec& net, const DressCsrModel& model,
                                   std::size_t level) {
    std::vector<std::size_t> nnz;
    const auto shapes = net.activation_shapes();
    for (const DressCsrLayer& l : model.layers)
        nnz.push_back(static_cast<std::size_t>(l.rows) * l.prefix_counts[level]);
    return nnz;
}

DressCsrModel finish_model(const NetworkSpec& net, const TrainResult& result,
                           const Dataset& train, const TrainConfig& cfg) {
    DressCsrModel model = build_dress_csr(net, result.params, result.masks);
    model.bn_variants = shared_bn_variants(net, result.params, model.num_levels);
    if (cfg.bn_posttrain_epochs > 0) {
        for (std::size_t k = 0; k < model.num_levels; ++k) {
            BnVariant v = bn_posttrain(net, result.params, result.masks.levels[k], train,
                                       cfg.bn_posttrain_epochs, cfg);
            set_bn_variant(model, k, std::move(v));
        }
    }
    return model;
}

ParamStore initial_params(const NetworkSpec& net, const AppConfig& cfg, const LoadedData& data,
                          const std::string& init_path) {
    if (!init_path.empty()) return load_checkpoint(init_path, net);
    ParamStore params = init_params(net, cfg.train.seed);
    if (cfg.train.pretrain_epochs > 0)
        params = pretrain_dense(net, std::move(params), data.train, data.val, cfg.train);
    return params;
}

int cmd_pretrain(const AppConfig& cfg) {
    const NetworkSpec net = build_net(cfg);
    const LoadedData data = load_data(cfg.data);
    RunRecord record;
    ParamStore params =
        pretrain_dense(net, init_params(net, cfg.train.seed), data.train, data.val, cfg.train,
                       &record);
    fs::create_directories(cfg.out_dir);
    save_checkpoint((fs::path(cfg.out_dir) / "dense.drsw").string(), net, params);
    write_run_outputs(cfg, "pretrain", record, data.train);
    const double acc = masked_eval_accuracy(net, params, nullptr, data.test);
    std::cout << "dense test accuracy " << acc << "\n";
    return 0;
}

int run_training(const AppConfig& cfg, const std::string& subcommand,
                 const std::string& init_path, bool cosine_diag) {
    const NetworkSpec net = build_net(cfg);
    const LoadedData data = load_data(cfg.data);
    ParamStore params = initial_params(net, cfg, data, init_path);

    TrainResult result;
    CosineTrace trace;
    if (subcommand == "train-dress" || subcommand == "diag-cosine") {
        AppConfig c = cfg;
        if (cosine_diag && c.train.cosine_log_interval <= 0) c.train.cosine_log_interval = 10;
        result = dress_train(net, std::move(params), data.train, data.val, c.train,
                             cosine_diag || c.train.cosine_log_interval > 0 ? &trace : nullptr);
    } else if (subcommand == "train-iter-inc") {
        result = iterative_increased(net, std::move(params), data.train, data.val, cfg.train);
    } else {
        result = iterative_decreased(net, std::move(params), data.train, data.val, cfg.train);
    }

    fs::create_directories(cfg.out_dir);
    save_checkpoint((fs::path(cfg.out_dir) / "model.drsw").string(), net, result.params);
    const DressCsrModel model = finish_model(net, result, data.train, cfg.train);
    save_dress_csr((fs::path(cfg.out_dir) / "model.drs1").string(), model);
    write_text(fs::path(cfg.out_dir) / "allocation.json",
               allocation_to_json(net, result.ladder));
    if (!trace.samples.empty() || cosine_diag)
        write_text(fs::path(cfg.out_dir) / "cosine_trace.csv", cosine_trace_to_csv(trace));
    write_run_outputs(cfg, subcommand, result.record, data.train);

    for (std::size_t k = 0; k < result.masks.num_levels(); ++k) {
        const double acc =
            masked_eval_accuracy(net, result.params, &result.masks.levels[k], data.test);
        std::cout << "subnet " << (k + 1) << " (s=" << cfg.train.ladder[k]
                  << ") test accuracy " << acc << "\n";
    }
    return 0;
}

int cmd_bn_posttrain(const AppConfig& cfg, const std::string& model_path,
                     const std::string& ckpt_path) {
    const NetworkSpec net = build_net(cfg);
    const LoadedData data = load_data(cfg.data);
    const ParamStore params = load_checkpoint(ckpt_path, net);
    DressCsrModel model = load_dress_csr(model_path);

    // Rebuild each level's mask from the stored tables.
    for (std::size_t k = 0; k < model.num_levels; ++k) {
        LayerMasks mask(net.layers.size());
        for (const DressCsrLayer& l : model.layers) {
            std::vector<std::uint8_t> m(static_cast<std::size_t>(l.rows) * l.row_size, 0);
            const SubnetCsr csr = extract_subnet(l, k);
            for (std::size_t r = 0; r < csr.rows; ++r)
                for (std::size_t j = 0; j < csr.nnz_per_row; ++j)
                    m[r * csr.cols + csr.row_cols(r)[j]] = 1;
            mask[l.layer_id] = std::move(m);
        }
        BnVariant v = bn_posttrain(net, params, mask, data.train,
                                   cfg.train.bn_posttrain_epochs, cfg.train);
        set_bn_variant(model, k, std::move(v));
    }
    save_dress_csr(model_path, model);
    write_run_outputs(cfg, "bn-posttrain", RunRecord{}, data.train);
    std::cout << "updated " << model.num_levels << " BN variants in " << model_path << "\n";
    return 0;
}

int cmd_export(const AppConfig& cfg, const std::string& ckpt_path, const std::string& out_path) {
    const NetworkSpec net = build_net(cfg);
    const ParamStore params = load_checkpoint(ckpt_path, net);
    const SparsityLadder ladder = allocate_layerwise(net, params, cfg.train.ladder);
    const MaskSet masks = sample_mask_set(net, params, ladder);
    DressCsrModel model = build_dress_csr(net, params, masks);
    model.bn_variants = shared_bn_variants(net, params, model.num_levels);
    save_dress_csr(out_path, model);
    std::cout << "exported " << model.layers.size() << " layers, " << model.num_levels
              << " levels to " << out_path << "\n";
    return 0;
}

Dataset eval_dataset(const AppConfig& cfg, const std::string& images,
                     const std::string& labels) {
    if (!images.empty()) {
        DataConfig d = cfg.data;
        d.kind = "idx";
        d.images = images;
        d.labels = labels;
        return load_idx(d.images, d.labels, d.classes, static_cast<float>(d.mean),
                        static_cast<float>(d.stddev));
    }
    return load_data(cfg.data).test;
}

int cmd_infer(const AppConfig& cfg, const std::string& model_path, const std::string& ckpt_path,
              int level, const std::string& images, const std::string& out_path) {
    const NetworkSpec net = build_net(cfg);
    const ParamStore params = load_checkpoint(ckpt_path, net);
    const DressCsrModel model = load_dress_csr(model_path);
    const SparseExecPlan plan =
        build_plan(net, params, model, static_cast<std::size_t>(level - 1));

    Dataset data = eval_dataset(cfg, images, "");
    if (!images.empty()) {
        // infer takes images only; synthesize dummy labels for gather.
        data.labels.assign(data.images.extent(0), 0);
    }
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const Tensor logits = infer(plan, data.gather(idx));

    std::ostringstream os;
    const std::size_t C = logits.extent(1);
    for (std::size_t b = 0; b < logits.extent(0); ++b) {
        for (std::size_t c = 0; c < C; ++c)
            os << logits.data[b * C + c] << (c + 1 < C ? "," : "\n");
    }
    if (out_path.empty())
        std::cout << os.str();
    else
        write_text(out_path, os.str());
    return 0;
}

int cmd_eval(const AppConfig& cfg, const std::string& model_path, const std::string& ckpt_path,
             int level, const std::string& images, const std::string& labels) {
    const NetworkSpec net = build_net(cfg);
    const ParamStore params = load_checkpoint(ckpt_path, net);
    const DressCsrModel model = load_dress_csr(model_path);
    const Dataset data = eval_dataset(cfg, images, labels);
    if (data.num_classes != net.num_classes)
        throw ConfigError("dataset class count does not match network");

    const std::size_t first = level > 0 ? static_cast<std::size_t>(level - 1) : 0;
    const std::size_t last = level > 0 ? static_cast<std::size_t>(level) : model.num_levels;
    for (std::size_t k = first; k < last; ++k) {
        const SparseExecPlan plan = build_plan(net, params, model, k);
        std::size_t correct = 0;
        const std::size_t batch = 256;
        for (std::size_t start = 0; start < data.size(); start += batch) {
            const std::size_t end = std::min(data.size(), start + batch);
            std::vector<std::size_t> idx(end - start);
            std::iota(idx.begin(), idx.end(), start);
            const Tensor logits = infer(plan, data.gather(idx));
            const std::size_t C = logits.extent(1);
            for (std::size_t b = 0; b < idx.size(); ++b) {
                const float* row = logits.data.data() + b * C;
                std::size_t arg = 0;
                for (std::size_t c = 1; c < C; ++c)
                    if (row[c] > row[arg]) arg = c;
                if (static_cast<int>(arg) == data.labels[idx[b]]) ++correct;
            }
        }
        std::cout << "level " << (k + 1) << " accuracy "
                  << static_cast<double>(correct) / static_cast<double>(data.size()) << "\n";
    }
    return 0;
}

int cmd_cost(const std::string& arch, const std::vector<double>& ladder) {
    const NetworkSpec net = make_arch(arch);
    const CostReport dense = dense_cost(net);
    std::cout << "arch " << arch << "\n";
    std::cout << "dense memory " << dense.memory_bytes / 1e6 << " MB (" << dense.memory_bytes
              << " bytes)\n";
    std::cout << "dense flops " << dense.flops / 1e6 << " MFLOPs (MACs, single input)\n";

    if (!ladder.empty()) {
        validate_levels(ladder);
        ParamStore params = init_params(net, 0);
        const SparsityLadder alloc = allocate_layerwise(net, params, ladder);
        const MaskSet masks = sample_mask_set(net, params, alloc);
        const DressCsrModel model = build_dress_csr(net, params, masks);
        for (std::size_t k = 0; k < ladder.size(); ++k) {
            const auto nnz = level_nnz(net, model, k);
            const CostReport sparse = sparse_cost(net, nnz, ladder.size());
            std::cout << "level " << (k + 1) << " (s=" << ladder[k] << ") memory "
                      << sparse.memory_bytes / 1e6 << " MB, flops "
                      << sparse.flops / 1e6 << " MFLOPs\n";
        }
    }
    return 0;
}

}  // namespace
}  // namespace dress

namespace dress {

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Nested sparse-subnet training and inference tool"};
    app.require_subcommand(1);

    std::string config_path, init_path, model_path, ckpt_path, images, labels, out_path,
        arch = "resnet20", out_dir_override;
    int level = 0;
    std::vector<double> ladder;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> epochs_override;

    auto add_config = [&](CLI::App* sub, bool required = true) {
        auto* opt = sub->add_option("--config", config_path, "JSON config file");
        if (required) opt->required();
        sub->add_option("--seed", seed_override, "override train.seed");
        sub->add_option("--epochs", epochs_override, "override train.epochs");
        sub->add_option("--out-dir", out_dir_override, "override out_dir");
    };

    auto* p_pre = app.add_subcommand("pretrain", "dense pre-training");
    add_config(p_pre);
    auto* p_dress = app.add_subcommand("train-dress", "parallel nested-subnet training");
    add_config(p_dress);
    p_dress->add_option("--init", init_path, "dense checkpoint to start from");
    auto* p_inc = app.add_subcommand("train-iter-inc", "iterative increased-sparsity baseline");
    add_config(p_inc);
    p_inc->add_option("--init", init_path, "dense checkpoint to start from");
    auto* p_dec = app.add_subcommand("train-iter-dec", "iterative decreased-sparsity baseline");
    add_config(p_dec);
    p_dec->add_option("--init", init_path, "dense checkpoint to start from");
    auto* p_bn = app.add_subcommand("bn-posttrain", "re-fit BN variants of a stored model");
    add_config(p_bn);
    p_bn->add_option("--model", model_path, "DRESS-CSR model file")->required();
    p_bn->add_option("--checkpoint", ckpt_path, "weights checkpoint")->required();
    auto* p_exp = app.add_subcommand("export", "sample masks and export a DRESS-CSR file");
    add_config(p_exp);
    p_exp->add_option("--checkpoint", ckpt_path, "weights checkpoint")->required();
    p_exp->add_option("--out", out_path, "output model file")->required();
    auto* p_inf = app.add_subcommand("infer", "sparse inference, logits as CSV");
    add_config(p_inf);
    p_inf->add_option("--model", model_path, "DRESS-CSR model file")->required();
    p_inf->add_option("--checkpoint", ckpt_path, "weights checkpoint")->required();
    p_inf->add_option("--level", level, "subnet level (1-based)")->required();
    p_inf->add_option("--images", images, "IDX image file (default: config test split)");
    p_inf->add_option("--out", out_path, "CSV output path (default: stdout)");
    auto* p_eval = app.add_subcommand("eval", "accuracy of stored subnets");
    add_config(p_eval);
    p_eval->add_option("--model", model_path, "DRESS-CSR model file")->required();
    p_eval->add_option("--checkpoint", ckpt_path, "weights checkpoint")->required();
    p_eval->add_option("--level", level, "subnet level (1-based, 0 = all)");
    p_eval->add_option("--images", images, "IDX image file");
    p_eval->add_option("--labels", labels, "IDX label file");
    auto* p_cost = app.add_subcommand("cost", "memory/FLOPs report");
    p_cost->add_option("--arch", arch, "architecture name")->required();
    p_cost->add_option("--ladder", ladder, "optional sparsity levels for sparse accounting");
    auto* p_diag = app.add_subcommand("diag-cosine", "gradient-cosine diagnostic run");
    add_config(p_diag);
    p_diag->add_option("--init", init_path, "dense checkpoint to start from");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(p_cost)) return cmd_cost(arch, ladder);

        AppConfig cfg = load_config(config_path);
        if (seed_override) cfg.train.seed = *seed_override;
        if (epochs_override) cfg.train.epochs = *epochs_override;
        if (!out_dir_override.empty()) cfg.out_dir = out_dir_override;
        cfg.train.validate();

        if (app.got_subcommand(p_pre)) return cmd_pretrain(cfg);
        if (app.got_subcommand(p_dress)) return run_training(cfg, "train-dress", init_path, false);
        if (app.got_subcommand(p_inc))
            return run_training(cfg, "train-iter-inc", init_path, false);
        if (app.got_subcommand(p_dec))
            return run_training(cfg, "train-iter-dec", init_path, false);
        if (app.got_subcommand(p_diag)) return run_training(cfg, "diag-cosine", init_path, true);
        if (app.got_subcommand(p_bn)) return cmd_bn_posttrain(cfg, model_path, ckpt_path);
        if (app.got_subcommand(p_exp)) return cmd_export(cfg, ckpt_path, out_path);
        if (app.got_subcommand(p_inf))
            return cmd_infer(cfg, model_path, ckpt_path, level, images, out_path);
        if (app.got_subcommand(p_eval))
            return cmd_eval(cfg, model_path, ckpt_path, level, images, labels);
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace dress
