#include <doctest.h>

#include <cmath>
#include <random>

#include <zlib.h>

#include "dress/dress_csr.hpp"
#include "dress/error.hpp"
#include "dress/net.hpp"
#include "dress/sampling.hpp"

using namespace dress;

namespace {

NetworkSpec conv1x1_net(int in_c, int out_c) {
    NetworkSpec net;
    net.input_shape = {static_cast<std::size_t>(in_c), 2, 2};
    net.num_classes = 0;
    net.layers.push_back(LayerSpec::conv(in_c, out_c, 1, 1, 0, "t"));
    return net;
}

void refresh_crc(std::vector<std::uint8_t>& bytes) {
    const std::uint32_t crc = static_cast<std::uint32_t>(crc32(
        0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size() - 4)));
    for (int i = 0; i < 4; ++i)
        bytes[bytes.size() - 4 + static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>(crc >> (8 * i));
}

MaskSet random_nested_masks(const NetworkSpec& net, const ParamStore& p, std::size_t K,
                            std::mt19937_64& rng) {
    const auto sampled = net.sampled_layers();
    MaskSet masks;
    masks.levels.assign(K, LayerMasks(net.layers.size()));
    for (int layer : sampled) {
        const RowView view = reshape_rows(net, layer);
        std::vector<std::size_t> counts(K);
        std::uniform_int_distribution<std::size_t> pick(1, view.row_size);
        counts[0] = pick(rng);
        for (std::size_t k = 1; k < K; ++k)
            counts[k] = std::uniform_int_distribution<std::size_t>(0, counts[k - 1])(rng);
        auto level_masks =
            sample_rows(p.layers[static_cast<std::size_t>(layer)].weight, view, counts);
        for (std::size_t k = 0; k < K; ++k)
            masks.levels[k][static_cast<std::size_t>(layer)] = std::move(level_masks[k]);
    }
    return masks;
}

}  // namespace

TEST_SUITE("dress_csr") {

TEST_CASE("4x8 table with sparsities 0.5/0.75/0.875 gets prefix counts (4,2,1)") {
    NetworkSpec net = conv1x1_net(8, 4);
    ParamStore p = init_params(net, 1);
    const SparsityLadder ladder = allocate_layerwise(net, p, {0.5, 0.75, 0.875});
    const MaskSet masks = sample_mask_set(net, p, ladder);
    const DressCsrModel model = build_dress_csr(net, p, masks);
    REQUIRE(model.layers.size() == 1);
    CHECK(model.layers[0].rows == 4);
    CHECK(model.layers[0].row_size == 8);
    CHECK(model.layers[0].prefix_counts == std::vector<std::uint32_t>{4, 2, 1});

    SUBCASE("extract k=3 keeps one column pair per row") {
        const SubnetCsr csr = extract_subnet(model.layers[0], 2);
        CHECK(csr.nnz_per_row == 1);
        CHECK(csr.rows == 4);
    }
    SUBCASE("extract k=1 yields the full tables") {
        const SubnetCsr csr = extract_subnet(model.layers[0], 0);
        CHECK(csr.nnz_per_row == 4);
        CHECK(csr.row_stride == 4);
    }
    SUBCASE("magnitude non-increasing along each row") {
        const DressCsrLayer& l = model.layers[0];
        for (std::size_t r = 0; r < l.rows; ++r)
            for (std::size_t j = 1; j < l.row_stride(); ++j)
                CHECK(std::fabs(l.values[r * l.row_stride() + j - 1]) >=
                      std::fabs(l.values[r * l.row_stride() + j]));
    }
    CHECK_THROWS_AS(extract_subnet(model.layers[0], 3), ConfigError);
}

TEST_CASE("single level all-ones mask stores a magnitude-sorted permutation per row") {
    NetworkSpec net = conv1x1_net(6, 3);
    ParamStore p = init_params(net, 3);
    MaskSet masks;
    masks.levels.assign(1, LayerMasks(net.layers.size()));
    masks.levels[0][0].assign(net.weight_count(0), 1);
    const DressCsrModel model = build_dress_csr(net, p, masks);
    const DressCsrLayer& l = model.layers[0];
    CHECK(l.prefix_counts[0] == 6);
    for (std::size_t r = 0; r < l.rows; ++r) {
        std::vector<bool> seen(6, false);
        for (std::size_t j = 0; j < 6; ++j) {
            const std::uint32_t c = l.col_indices[r * 6 + j];
            REQUIRE(c < 6);
            CHECK(!seen[c]);
            seen[c] = true;
            if (j > 0)
                CHECK(std::fabs(l.values[r * 6 + j - 1]) >= std::fabs(l.values[r * 6 + j]));
        }
    }
}

TEST_CASE("densified prefix extraction equals the masked dense tensor exactly") {
    NetworkSpec net;
    net.input_shape = {16};
    net.num_classes = 8;
    net.layers.push_back(LayerSpec::fc(16, 8, "w", false));
    ParamStore p = init_params(net, 5);
    const SparsityLadder ladder = allocate_layerwise(net, p, {0.5, 0.75});
    const MaskSet masks = sample_mask_set(net, p, ladder);
    const DressCsrModel model = build_dress_csr(net, p, masks);
    for (std::size_t k = 0; k < 2; ++k) {
        const Tensor dense = densify(extract_subnet(model.layers[0], k));
        const auto& m = masks.levels[k][0];
        for (std::size_t j = 0; j < dense.numel(); ++j) {
            const float want = m[j] ? p.layers[0].weight.data[j] : 0.0f;
            CHECK(dense.data[j] == want);  // exact 32-bit equality
        }
    }
}

TEST_CASE("non-nested masks are rejected as a format fault") {
    NetworkSpec net;
    net.input_shape = {4};
    net.num_classes = 2;
    net.layers.push_back(LayerSpec::fc(4, 2, "w", false));
    ParamStore p = init_params(net, 2);
    MaskSet masks;
    masks.levels.assign(2, LayerMasks(net.layers.size()));
    masks.levels[0][0] = {1, 1, 0, 0, 1, 1, 0, 0};
    masks.levels[1][0] = {0, 0, 1, 0, 0, 0, 1, 0};  // support escapes level 0
    CHECK_THROWS_AS(build_dress_csr(net, p, masks), FormatError);
}

TEST_CASE("non-row-uniform masks are rejected") {
    NetworkSpec net;
    net.input_shape = {4};
    net.num_classes = 2;
    net.layers.push_back(LayerSpec::fc(4, 2, "w", false));
    ParamStore p = init_params(net, 2);
    MaskSet masks;
    masks.levels.assign(1, LayerMasks(net.layers.size()));
    masks.levels[0][0] = {1, 1, 0, 0, 1, 0, 0, 0};  // rows 2 vs 1 nonzeros
    CHECK_THROWS_AS(build_dress_csr(net, p, masks), FormatError);
}

TEST_CASE("serialization round trip is byte-identical") {
    NetworkSpec net = conv1x1_net(8, 4);
    ParamStore p = init_params(net, 9);
    const SparsityLadder ladder = allocate_layerwise(net, p, {0.5, 0.875});
    const DressCsrModel model = build_dress_csr(net, p, sample_mask_set(net, p, ladder));
    const auto bytes = serialize(model);
    const DressCsrModel back = deserialize(bytes);
    CHECK(serialize(back) == bytes);
    CHECK(back.layers[0].col_indices == model.layers[0].col_indices);
    CHECK(back.layers[0].values == model.layers[0].values);
    CHECK(back.layers[0].name == model.layers[0].name);
}

TEST_CASE("flipped magic byte rejected") {
    NetworkSpec net = conv1x1_net(4, 2);
    ParamStore p = init_params(net, 1);
    const SparsityLadder ladder = allocate_layerwise(net, p, {0.5});
    auto bytes = serialize(build_dress_csr(net, p, sample_mask_set(net, p, ladder)));
    bytes[0] ^= 0xFF;
    refresh_crc(bytes);
    CHECK_THROWS_AS(deserialize(bytes), FormatError);
}

TEST_CASE("corrupted checksum rejected") {
    NetworkSpec net = conv1x1_net(4, 2);
    ParamStore p = init_params(net, 1);
    const SparsityLadder ladder = allocate_layerwise(net, p, {0.5});
    auto bytes = serialize(build_dress_csr(net, p, sample_mask_set(net, p, ladder)));
    bytes[10] ^= 0x01;  // body changed, CRC stale
    CHECK_THROWS_AS(deserialize(bytes), FormatError);
}

TEST_CASE("non-decreasing prefix counts rejected on load") {
    NetworkSpec net = conv1x1_net(8, 4);
    net.layers[0].name = "a";
    ParamStore p = init_params(net, 1);
    const SparsityLadder ladder = allocate_layerwise(net, p, {0.5, 0.75});
    auto bytes = serialize(build_dress_csr(net, p, sample_mask_set(net, p, ladder)));
    // Layout: magic(4) version(4) K(4) count(4) name_len(2)+1 id(4) rows(4)
    // N(4) prefix[0](4) prefix[1](4) ...  -> prefix[1] starts at offset 35.
    const std::size_t prefix1 = 4 + 4 + 4 + 4 + 2 + 1 + 4 + 4 + 4 + 4;
    bytes[prefix1] = 5;  // prefix (4,2) -> (4,5): increasing, still <= N
    refresh_crc(bytes);
    CHECK_THROWS_AS(deserialize(bytes), FormatError);
}

TEST_CASE("truncated payload rejected") {
    NetworkSpec net = conv1x1_net(4, 2);
    ParamStore p = init_params(net, 1);
    const SparsityLadder ladder = allocate_layerwise(net, p, {0.5});
    auto bytes = serialize(build_dress_csr(net, p, sample_mask_set(net, p, ladder)));
    bytes.resize(bytes.size() / 2);
    CHECK_THROWS_AS(deserialize(bytes), FormatError);
}

TEST_CASE("randomized property suite: nesting, uniformity, round trips") {
    // >= 1000 instances with N <= 32, H <= 16, K <= 4.
    std::mt19937_64 rng(20240811);
    std::normal_distribution<float> g;
    int instances = 0;
    while (instances < 1000) {
        const std::size_t H = std::uniform_int_distribution<std::size_t>(1, 16)(rng);
        const std::size_t N = std::uniform_int_distribution<std::size_t>(1, 32)(rng);
        const std::size_t K = std::uniform_int_distribution<std::size_t>(1, 4)(rng);

        NetworkSpec net;
        net.input_shape = {N};
        net.num_classes = static_cast<int>(H);
        net.layers.push_back(
            LayerSpec::fc(static_cast<int>(N), static_cast<int>(H), "w", false));
        ParamStore p = init_params(net, static_cast<std::uint64_t>(instances));
        for (auto& v : p.layers[0].weight.data) v = g(rng);

        const MaskSet masks = random_nested_masks(net, p, K, rng);
        REQUIRE(masks_nested(masks));  // Eq. 3, exact

        const DressCsrModel model = build_dress_csr(net, p, masks);
        const DressCsrLayer& l = model.layers[0];
        for (std::size_t k = 0; k < K; ++k) {
            // row-uniform counts, exact
            const auto& m = masks.levels[k][0];
            for (std::size_t r = 0; r < H; ++r) {
                std::size_t cnt = 0;
                for (std::size_t c = 0; c < N; ++c) cnt += m[r * N + c];
                REQUIRE(cnt == l.prefix_counts[k]);
            }
            // densified prefix extraction equals dense masked tensor, exact
            const Tensor dense = densify(extract_subnet(l, k));
            for (std::size_t j = 0; j < dense.numel(); ++j)
                REQUIRE(dense.data[j] == (m[j] ? p.layers[0].weight.data[j] : 0.0f));
        }
        // serialization round trip byte-identical
        const auto bytes = serialize(model);
        REQUIRE(serialize(deserialize(bytes)) == bytes);
        ++instances;
    }
    CHECK(instances == 1000);
}

TEST_CASE("BN variants survive the file format") {
    NetworkSpec net;
    net.input_shape = {2, 4, 4};
    net.num_classes = 0;
    net.layers.push_back(LayerSpec::conv(2, 2, 3, 1, 1, "c"));
    net.layers.push_back(LayerSpec::batchnorm(2, "bn"));
    ParamStore p = init_params(net, 4);
    const SparsityLadder ladder = allocate_layerwise(net, p, {0.5, 0.75});
    DressCsrModel model = build_dress_csr(net, p, sample_mask_set(net, p, ladder));
    model.bn_variants[1].shift[0].data[0] = 42.0f;
    const DressCsrModel back = deserialize(serialize(model));
    CHECK(back.bn_variants[1].shift[0].data[0] == 42.0f);
    CHECK(back.bn_variants[0].shift[0].data == model.bn_variants[0].shift[0].data);
}

}  // TEST_SUITE
