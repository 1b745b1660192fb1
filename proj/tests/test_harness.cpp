#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "dress/cli.hpp"
#include "dress/data.hpp"
#include "dress/error.hpp"

using namespace dress;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int cli(std::vector<std::string> args) {
    std::vector<const char*> argv;
    argv.push_back("dress-cli");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("IDX image/label round trip") {
    const fs::path dir = temp_dir("dress_idx_rt");
    Tensor images({4, 1, 28, 28});
    for (std::size_t j = 0; j < images.numel(); ++j)
        images.data[j] = static_cast<float>(j % 256) / 255.0f;  // exactly representable grid
    const std::vector<int> labels{0, 2, 1, 2};

    save_idx_images((dir / "img.idx").string(), images);
    save_idx_labels((dir / "lbl.idx").string(), labels);

    const Dataset d = load_idx((dir / "img.idx").string(), (dir / "lbl.idx").string(), 3);
    REQUIRE(d.images.shape == std::vector<std::size_t>{4, 1, 28, 28});
    CHECK(d.images.data == images.data);  // u8 grid values survive bit-exactly
    CHECK(d.labels == labels);
    CHECK(d.num_classes == 3);
}

TEST_CASE("IDX rejects malformed inputs") {
    const fs::path dir = temp_dir("dress_idx_bad");
    Tensor images({4, 1, 6, 6});
    save_idx_images((dir / "img.idx").string(), images);
    save_idx_labels((dir / "lbl.idx").string(), {0, 1, 2});  // count mismatch
    CHECK_THROWS_AS(load_idx((dir / "img.idx").string(), (dir / "lbl.idx").string(), 3),
                    FormatError);

    save_idx_labels((dir / "lbl4.idx").string(), {0, 1, 2, 9});  // label out of class range
    CHECK_THROWS_AS(load_idx((dir / "img.idx").string(), (dir / "lbl4.idx").string(), 3),
                    FormatError);

    // Flipped magic.
    std::ofstream os(dir / "bad_magic.idx", std::ios::binary);
    const std::array<unsigned char, 8> bytes{0x00, 0x00, 0x08, 0x04, 0, 0, 0, 0};
    os.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    os.close();
    CHECK_THROWS_AS(load_idx_images((dir / "bad_magic.idx").string()), FormatError);

    // Truncated payload: header claims 4 images but carries none.
    std::ofstream ot(dir / "trunc.idx", std::ios::binary);
    const std::array<unsigned char, 16> hdr{0x00, 0x00, 0x08, 0x03, 0, 0, 0, 4,
                                            0,    0,    0,    6,    0, 0, 0, 6};
    ot.write(reinterpret_cast<const char*>(hdr.data()), hdr.size());
    ot.close();
    CHECK_THROWS_AS(load_idx_images((dir / "trunc.idx").string()), FormatError);
}

TEST_CASE("synthetic data is deterministic per seed") {
    const Dataset a = gen_synthetic(10, 784, 200, 42);
    const Dataset b = gen_synthetic(10, 784, 200, 42);
    const Dataset c = gen_synthetic(10, 784, 200, 43);
    CHECK(a.images.data == b.images.data);
    CHECK(a.labels == b.labels);
    CHECK(a.images.data != c.images.data);
    CHECK(dataset_content_hash(a) == dataset_content_hash(b));
    CHECK(dataset_content_hash(a) != dataset_content_hash(c));

    Dataset mutated = a;
    mutated.images.data[0] += 1.0f;
    CHECK(dataset_content_hash(mutated) != dataset_content_hash(a));
}

TEST_CASE("synthetic image variant matches the requested geometry") {
    const Dataset d = gen_synthetic_images(3, 2, 7, 12, 5);
    CHECK(d.images.shape == std::vector<std::size_t>{12, 2, 7, 7});
    CHECK(d.labels.size() == 12);
    for (int y : d.labels) {
        CHECK(y >= 0);
        CHECK(y < 3);
    }
}

TEST_CASE("split_val produces a deterministic disjoint partition") {
    const Dataset full = gen_synthetic(10, 16, 10000, 99);
    auto [val_a, test_a] = split_val(full, 0.2, 7);
    auto [val_b, test_b] = split_val(full, 0.2, 7);
    CHECK(val_a.size() == 2000);
    CHECK(test_a.size() == 8000);
    CHECK(val_a.images.data == val_b.images.data);
    CHECK(test_a.labels == test_b.labels);

    // Union preserved: per-class counts add up to the original histogram.
    std::vector<int> hist_full(10, 0), hist_split(10, 0);
    for (int y : full.labels) ++hist_full[static_cast<std::size_t>(y)];
    for (int y : val_a.labels) ++hist_split[static_cast<std::size_t>(y)];
    for (int y : test_a.labels) ++hist_split[static_cast<std::size_t>(y)];
    CHECK(hist_full == hist_split);

    auto [val_c, test_c] = split_val(full, 0.2, 8);
    CHECK(val_a.labels != val_c.labels);
    (void)test_c;

    CHECK_THROWS_AS(split_val(full, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(split_val(full, 1.0, 1), ConfigError);
}

TEST_CASE("CLI exit codes: usage and config errors are 2") {
    CHECK(cli({"train-dress"}) == 2);                       // missing required --config
    CHECK(cli({"no-such-command"}) == 2);                   // unknown subcommand
    CHECK(cli({"cost", "--arch", "resnet20", "--bogus"}) == 2);
    CHECK(cli({"train-dress", "--config", "/nonexistent/cfg.json"}) == 2);
    CHECK(cli({"cost", "--arch", "resnet20"}) == 0);

    const fs::path dir = temp_dir("dress_cli_badcfg");
    std::ofstream(dir / "bad.json") << R"({"train": {"learning_rate": 0.1}})";
    CHECK(cli({"train-dress", "--config", (dir / "bad.json").string()}) == 2);  // unknown key
    std::ofstream(dir / "notjson.json") << "{nope";
    CHECK(cli({"train-dress", "--config", (dir / "notjson.json").string()}) == 2);
}

TEST_CASE("CLI end-to-end: train, eval and infer a tiny model") {
    const fs::path dir = temp_dir("dress_cli_e2e");
    const fs::path out = dir / "out";
    std::ofstream(dir / "cfg.json") << R"({
        "arch": "mlp",
        "mlp_dims": [8, 16, 3],
        "data": {"kind": "synthetic", "classes": 3, "dim": 8,
                 "train_n": 120, "test_n": 60, "seed": 5},
        "train": {"lr_init": 0.05, "epochs": 2, "pretrain_epochs": 1,
                  "batch_size": 32, "ladder": [0.5, 0.8],
                  "bn_posttrain_epochs": 0, "seed": 3},
        "out_dir": ")" << out.generic_string() << R"("
    })";

    REQUIRE(cli({"train-dress", "--config", (dir / "cfg.json").string()}) == 0);
    CHECK(fs::exists(out / "model.drsw"));
    CHECK(fs::exists(out / "model.drs1"));
    CHECK(fs::exists(out / "allocation.json"));
    CHECK(fs::exists(out / "train-dress_record.csv"));
    CHECK(fs::exists(out / "train-dress_metadata.json"));

    std::ifstream rec(out / "train-dress_record.csv");
    std::string header;
    std::getline(rec, header);
    CHECK(header == "epoch,subnet,loss,val_acc,avg_val_acc,realloc_flag");

    std::ifstream meta(out / "train-dress_metadata.json");
    const std::string meta_text((std::istreambuf_iterator<char>(meta)),
                                std::istreambuf_iterator<char>());
    CHECK(meta_text.find("\"schema_version\": 1") != std::string::npos);
    CHECK(meta_text.find("\"dataset_content_hash\"") != std::string::npos);
    CHECK(meta_text.find("\"seed\": 3") != std::string::npos);

    CHECK(cli({"eval", "--config", (dir / "cfg.json").string(), "--model",
               (out / "model.drs1").string(), "--checkpoint",
               (out / "model.drsw").string()}) == 0);
    CHECK(cli({"infer", "--config", (dir / "cfg.json").string(), "--model",
               (out / "model.drs1").string(), "--checkpoint", (out / "model.drsw").string(),
               "--level", "2", "--out", (dir / "logits.csv").string()}) == 0);
    CHECK(fs::exists(dir / "logits.csv"));

    // --seed/--out-dir overrides take effect (fresh run in a new directory).
    const fs::path out2 = dir / "out2";
    REQUIRE(cli({"train-dress", "--config", (dir / "cfg.json").string(), "--seed", "4",
                 "--out-dir", out2.generic_string()}) == 0);
    std::ifstream meta2(out2 / "train-dress_metadata.json");
    const std::string meta2_text((std::istreambuf_iterator<char>(meta2)),
                                 std::istreambuf_iterator<char>());
    CHECK(meta2_text.find("\"seed\": 4") != std::string::npos);
}

}  // TEST_SUITE
