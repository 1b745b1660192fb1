#include <doctest.h>

#include <cmath>
#include <random>

#include "dress/checkpoint.hpp"
#include "dress/engine.hpp"
#include "dress/error.hpp"
#include "dress/loss.hpp"
#include "dress/net.hpp"
#include "dress/optimizer.hpp"
#include "dress/zoo.hpp"

using namespace dress;

namespace {

template <typename S>
TensorT<S> random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng, double scale = 1.0) {
    TensorT<S> t(std::move(shape));
    std::normal_distribution<double> g(0.0, scale);
    for (auto& v : t.data) v = static_cast<S>(g(rng));
    return t;
}

template <typename S>
void randomize_params(ParamStoreT<S>& params, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 0.5);
    auto fill = [&](TensorT<S>& t) {
        for (auto& v : t.data) v = static_cast<S>(g(rng));
    };
    for (auto& l : params.layers) {
        fill(l.weight);
        fill(l.bias);
        fill(l.bn_scale);
        fill(l.bn_shift);
        fill(l.bn_mean);
        for (auto& v : l.bn_var.data) v = static_cast<S>(0.5 + std::fabs(g(rng)));
    }
}

double rel_err(double a, double b) { return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)}); }

// A small net exercising every layer kind, including a residual block with a
// shortcut branch reading an earlier activation.
NetworkSpec every_kind_net() {
    NetworkSpec net;
    net.input_shape = {2, 6, 6};
    net.num_classes = 4;
    net.layers.push_back(LayerSpec::conv(2, 3, 3, 1, 1, "c1", true));  // 0
    net.layers.push_back(LayerSpec::batchnorm(3, "bn1"));              // 1
    net.layers.push_back(LayerSpec::relu("r1"));                       // 2
    net.layers.push_back(LayerSpec::conv(3, 3, 3, 1, 1, "c2"));        // 3
    net.layers.push_back(LayerSpec::residual_add(2, "add"));           // 4: + relu out
    net.layers.push_back(LayerSpec::avgpool(2, 2, 0, "p1"));           // 5: 3x3x3
    net.layers.push_back(LayerSpec::avgpool(3, 2, 1, "p2"));           // 6: 3x2x2
    net.layers.push_back(LayerSpec::flatten("fl"));                    // 7: 12
    net.layers.push_back(LayerSpec::fc(12, 4, "head"));                // 8
    net.validate();
    return net;
}

}  // namespace

TEST_SUITE("netcore") {

TEST_CASE("identity fc forward returns input") {
    NetworkSpec net;
    net.input_shape = {3};
    net.num_classes = 3;
    net.layers.push_back(LayerSpec::fc(3, 3));
    ParamStore p = init_params(net, 0);
    p.layers[0].weight.fill(0.0f);
    for (int i = 0; i < 3; ++i) p.layers[0].weight.data[i * 3 + i] = 1.0f;
    p.layers[0].bias.fill(0.0f);
    Tensor x({2, 3}, {0.5f, -1.0f, 2.0f, 3.0f, 0.0f, -0.25f});
    const Tensor y = forward<float>(net, p, nullptr, x, Mode::Eval, nullptr);
    REQUIRE(y.same_shape(x));
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y.data[i] == x.data[i]);
}

TEST_CASE("mask of all ones is bitwise identical to no mask") {
    NetworkSpec net = every_kind_net();
    ParamStore p = init_params(net, 7);
    std::mt19937_64 rng(11);
    const Tensor x = random_tensor<float>({3, 2, 6, 6}, rng);
    LayerMasks ones(net.layers.size());
    for (int layer : net.sampled_layers())
        ones[static_cast<std::size_t>(layer)].assign(net.weight_count(layer), 1);
    ParamStore p2 = p;
    const Tensor a = forward<float>(net, p, nullptr, x, Mode::Eval, nullptr, false);
    const Tensor b = forward<float>(net, p2, &ones, x, Mode::Eval, nullptr, false);
    REQUIRE(a.numel() == b.numel());
    for (std::size_t i = 0; i < a.numel(); ++i) CHECK(a.data[i] == b.data[i]);  // bitwise
}

TEST_CASE("two-layer forward matches hand-rolled matmul oracle within 1e-6 relative") {
    NetworkSpec net;
    net.input_shape = {5};
    net.num_classes = 3;
    net.layers.push_back(LayerSpec::fc(5, 4));
    net.layers.push_back(LayerSpec::relu());
    net.layers.push_back(LayerSpec::fc(4, 3));
    ParamStore p = init_params(net, 42);
    std::mt19937_64 rng(42);
    const Tensor x = random_tensor<float>({2, 5}, rng);
    const Tensor y = forward<float>(net, p, nullptr, x, Mode::Eval, nullptr);

    for (std::size_t b = 0; b < 2; ++b) {
        double h[4];
        for (int o = 0; o < 4; ++o) {
            double s = p.layers[0].bias[static_cast<std::size_t>(o)];
            for (int i = 0; i < 5; ++i)
                s += static_cast<double>(p.layers[0].weight.data[static_cast<std::size_t>(o * 5 + i)]) *
                     x.data[b * 5 + static_cast<std::size_t>(i)];
            h[o] = std::max(0.0, s);
        }
        for (int o = 0; o < 3; ++o) {
            double s = p.layers[2].bias[static_cast<std::size_t>(o)];
            for (int i = 0; i < 4; ++i)
                s += static_cast<double>(p.layers[2].weight.data[static_cast<std::size_t>(o * 4 + i)]) * h[i];
            CHECK(rel_err(s, y.data[b * 3 + static_cast<std::size_t>(o)]) < 1e-6);
        }
    }
}

TEST_CASE("masked forward equals zeroed-weight forward bitwise for conv and fc") {
    NetworkSpec net = every_kind_net();
    ParamStore p = init_params(net, 3);
    std::mt19937_64 rng(5);
    const Tensor x = random_tensor<float>({2, 2, 6, 6}, rng);
    LayerMasks mask(net.layers.size());
    std::bernoulli_distribution coin(0.5);
    for (int layer : net.sampled_layers()) {
        auto& m = mask[static_cast<std::size_t>(layer)];
        m.resize(net.weight_count(layer));
        for (auto& v : m) v = coin(rng) ? 1 : 0;
    }
    ParamStore zeroed = p;
    for (int layer : net.sampled_layers()) {
        auto& w = zeroed.layers[static_cast<std::size_t>(layer)].weight;
        const auto& m = mask[static_cast<std::size_t>(layer)];
        for (std::size_t j = 0; j < w.numel(); ++j)
            if (!m[j]) w.data[j] = 0.0f;
    }
    const Tensor a = forward<float>(net, p, &mask, x, Mode::Eval, nullptr, false);
    const Tensor b = forward<float>(net, zeroed, nullptr, x, Mode::Eval, nullptr, false);
    for (std::size_t i = 0; i < a.numel(); ++i) CHECK(a.data[i] == b.data[i]);
}

TEST_CASE("finite-difference gradient check covers every layer kind") {
    // [DERIVED] central finite differences in 64-bit, step 1e-4, rel < 1e-4.
    NetworkSpec net = every_kind_net();
    ParamStoreT<double> p = init_params(net, 9).cast<double>();
    std::mt19937_64 rng(17);
    randomize_params(p, rng);
    const TensorT<double> x = random_tensor<double>({3, 2, 6, 6}, rng);
    const std::vector<int> labels{0, 2, 3};

    auto loss_at = [&](ParamStoreT<double>& params) {
        const TensorT<double> logits =
            forward<double>(net, params, nullptr, x, Mode::Train, nullptr, false);
        return cross_entropy_loss(logits, labels).first;
    };

    ForwardCacheT<double> cache;
    const TensorT<double> logits = forward<double>(net, p, nullptr, x, Mode::Train, &cache, false);
    auto [loss, lgrad] = cross_entropy_loss(logits, labels);
    (void)loss;
    const ParamStoreT<double> grads = backward<double>(net, p, cache, lgrad);

    const double h = 1e-4;
    auto check_tensor = [&](TensorT<double>& t, const TensorT<double>& g, const char* what) {
        for (std::size_t j = 0; j < t.numel(); ++j) {
            const double orig = t.data[j];
            t.data[j] = orig + h;
            const double lp = loss_at(p);
            t.data[j] = orig - h;
            const double lm = loss_at(p);
            t.data[j] = orig;
            const double fd = (lp - lm) / (2.0 * h);
            INFO(what << " index " << j);
            CHECK(rel_err(fd, g.data[j]) < 1e-4);
        }
    };

    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        check_tensor(p.layers[i].weight, grads.layers[i].weight, "weight");
        check_tensor(p.layers[i].bias, grads.layers[i].bias, "bias");
        check_tensor(p.layers[i].bn_scale, grads.layers[i].bn_scale, "bn_scale");
        check_tensor(p.layers[i].bn_shift, grads.layers[i].bn_shift, "bn_shift");
    }
}

TEST_CASE("hand-derived 2x2 fc gradient with squared-error loss") {
    // [DERIVED] y = W x, L = 0.5 * ||y - t||^2 on a single sample:
    // dL/dW = (y - t) x^T, dL/dx = W^T (y - t).
    NetworkSpec net;
    net.input_shape = {2};
    net.num_classes = 2;
    net.layers.push_back(LayerSpec::fc(2, 2, "w", false));
    ParamStore p = init_params(net, 0);
    p.layers[0].weight = Tensor({2, 2}, {1.0f, 2.0f, -0.5f, 0.25f});
    const Tensor x({1, 2}, {3.0f, -1.0f});
    ForwardCache cache;
    const Tensor y = forward<float>(net, p, nullptr, x, Mode::Train, &cache);
    // y = (1*3 + 2*(-1), -0.5*3 + 0.25*(-1)) = (1, -1.75)
    CHECK(y.data[0] == doctest::Approx(1.0f));
    CHECK(y.data[1] == doctest::Approx(-1.75f));
    const float t0 = 0.5f, t1 = 0.5f;
    Tensor lgrad({1, 2}, {y.data[0] - t0, y.data[1] - t1});  // (0.5, -2.25)
    const GradStore g = backward<float>(net, p, cache, lgrad);
    // dW = [[0.5*3, 0.5*(-1)], [-2.25*3, -2.25*(-1)]]
    CHECK(g.layers[0].weight.data[0] == doctest::Approx(1.5f));
    CHECK(g.layers[0].weight.data[1] == doctest::Approx(-0.5f));
    CHECK(g.layers[0].weight.data[2] == doctest::Approx(-6.75f));
    CHECK(g.layers[0].weight.data[3] == doctest::Approx(2.25f));
}

TEST_CASE("zero upstream gradient yields zero GradStore") {
    NetworkSpec net = every_kind_net();
    ParamStore p = init_params(net, 2);
    std::mt19937_64 rng(2);
    const Tensor x = random_tensor<float>({2, 2, 6, 6}, rng);
    ForwardCache cache;
    const Tensor logits = forward<float>(net, p, nullptr, x, Mode::Train, &cache, false);
    Tensor zero(logits.shape);
    const GradStore g = backward<float>(net, p, cache, zero);
    for (const auto& l : g.layers) {
        for (float v : l.weight.data) CHECK(v == 0.0f);
        for (float v : l.bias.data) CHECK(v == 0.0f);
        for (float v : l.bn_scale.data) CHECK(v == 0.0f);
        for (float v : l.bn_shift.data) CHECK(v == 0.0f);
    }
}

TEST_CASE("cross-entropy loss values and gradient") {
    SUBCASE("uniform logits over 10 classes give ln 10") {
        Tensor logits({2, 10}, std::vector<float>(20, 0.7f));
        const auto [loss, grad] = cross_entropy_loss(logits, {3, 9});
        CHECK(loss == doctest::Approx(std::log(10.0)).epsilon(1e-6));  // [TRIVIAL] ln 10
    }
    SUBCASE("large-margin correct logit drives loss toward zero") {
        Tensor logits({1, 3}, {30.0f, 0.0f, 0.0f});
        const auto [loss, grad] = cross_entropy_loss(logits, {0});
        CHECK(loss < 1e-9);
    }
    SUBCASE("random 4x3 matches finite differences within 1e-5") {
        std::mt19937_64 rng(23);
        TensorT<double> logits = random_tensor<double>({4, 3}, rng);
        const std::vector<int> labels{0, 2, 1, 1};
        const auto [loss, grad] = cross_entropy_loss(logits, labels);
        (void)loss;
        const double h = 1e-6;
        for (std::size_t j = 0; j < logits.numel(); ++j) {
            const double orig = logits.data[j];
            logits.data[j] = orig + h;
            const double lp = cross_entropy_loss(logits, labels).first;
            logits.data[j] = orig - h;
            const double lm = cross_entropy_loss(logits, labels).first;
            logits.data[j] = orig;
            CHECK(rel_err((lp - lm) / (2 * h), grad.data[j]) < 1e-5);
        }
    }
    SUBCASE("loss is batch-permutation invariant") {
        std::mt19937_64 rng(31);
        Tensor logits = random_tensor<float>({4, 5}, rng);
        const std::vector<int> labels{1, 0, 4, 2};
        Tensor perm({4, 5});
        const std::size_t order[4] = {2, 0, 3, 1};
        std::vector<int> plabels(4);
        for (std::size_t b = 0; b < 4; ++b) {
            plabels[b] = labels[order[b]];
            for (std::size_t c = 0; c < 5; ++c) perm.data[b * 5 + c] = logits.data[order[b] * 5 + c];
        }
        CHECK(cross_entropy_loss(logits, labels).first ==
              doctest::Approx(cross_entropy_loss(perm, plabels).first).epsilon(1e-7));
    }
}

TEST_CASE("SGD update rules") {
    NetworkSpec net;
    net.input_shape = {1};
    net.num_classes = 1;
    net.layers.push_back(LayerSpec::fc(1, 1, "w", false));
    ParamStore p = init_params(net, 0);
    ParamStore vel = zero_like(p);
    GradStore g = zero_like(p);

    SUBCASE("momentum 0, weight decay 0: w <- w - lr*g") {
        p.layers[0].weight.data[0] = 2.0f;
        g.layers[0].weight.data[0] = 0.5f;
        sgd_step<float>(net, p, g, vel, {0.1, 0.0, 0.0, true});
        CHECK(p.layers[0].weight.data[0] == doctest::Approx(2.0f - 0.1f * 0.5f));
    }
    SUBCASE("two consecutive Nesterov steps match the hand recursion") {
        // v1 = g1; w1 = w0 - lr(g1 + mu v1); v2 = mu v1 + g2; w2 = w1 - lr(g2 + mu v2)
        const double lr = 0.1, mu = 0.9, g1 = 0.5, g2 = -0.2;
        double w = 1.0, v = 0.0;
        p.layers[0].weight.data[0] = static_cast<float>(w);
        g.layers[0].weight.data[0] = static_cast<float>(g1);
        sgd_step<float>(net, p, g, vel, {lr, mu, 0.0, true});
        v = mu * v + g1;
        w -= lr * (g1 + mu * v);
        CHECK(p.layers[0].weight.data[0] == doctest::Approx(w).epsilon(1e-6));
        g.layers[0].weight.data[0] = static_cast<float>(g2);
        sgd_step<float>(net, p, g, vel, {lr, mu, 0.0, true});
        v = mu * v + g2;
        w -= lr * (g2 + mu * v);
        CHECK(p.layers[0].weight.data[0] == doctest::Approx(w).epsilon(1e-6));
    }
    SUBCASE("zero gradient: velocity decays, weight moves by look-ahead term") {
        p.layers[0].weight.data[0] = 1.0f;
        vel.layers[0].weight.data[0] = 0.4f;
        sgd_step<float>(net, p, g, vel, {0.1, 0.9, 0.0, true});
        CHECK(vel.layers[0].weight.data[0] == doctest::Approx(0.36f));
        CHECK(p.layers[0].weight.data[0] == doctest::Approx(1.0f - 0.1f * 0.9f * 0.36f));
    }
    SUBCASE("update mask freezes gated weights bit-exactly") {
        p.layers[0].weight.data[0] = 1.25f;
        g.layers[0].weight.data[0] = 3.0f;
        LayerMasks gate(net.layers.size());
        gate[0] = {0};
        sgd_step<float>(net, p, g, vel, {0.1, 0.9, 5e-4, true}, &gate);
        CHECK(p.layers[0].weight.data[0] == 1.25f);  // bitwise frozen
        CHECK(vel.layers[0].weight.data[0] == 0.0f);
    }
}

TEST_CASE("cosine schedule endpoints and midpoint") {
    CHECK(cosine_lr(0, 100, 0.1) == doctest::Approx(0.1));
    CHECK(cosine_lr(100, 100, 0.1) == doctest::Approx(0.0));
    CHECK(cosine_lr(50, 100, 0.1) == doctest::Approx(0.05));
    CHECK_THROWS_AS(cosine_lr(-1, 100, 0.1), ConfigError);
}

TEST_CASE("BN eval output is an affine function of the input") {
    NetworkSpec net;
    net.input_shape = {2, 2, 2};
    net.num_classes = 0;
    net.layers.push_back(LayerSpec::batchnorm(2));
    ParamStore p = init_params(net, 0);
    p.layers[0].bn_scale = Tensor({2}, {2.0f, -1.0f});
    p.layers[0].bn_shift = Tensor({2}, {0.5f, 1.0f});
    p.layers[0].bn_mean = Tensor({2}, {1.0f, -2.0f});
    p.layers[0].bn_var = Tensor({2}, {4.0f, 0.25f});
    std::mt19937_64 rng(3);
    const Tensor x = random_tensor<float>({2, 2, 2, 2}, rng);
    const Tensor y = forward<float>(net, p, nullptr, x, Mode::Eval, nullptr, false);
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t c = 0; c < 2; ++c)
            for (std::size_t q = 0; q < 4; ++q) {
                const std::size_t i = (b * 2 + c) * 4 + q;
                const double is = 1.0 / std::sqrt(static_cast<double>(p.layers[0].bn_var[c]) + 1e-5);
                const double want = p.layers[0].bn_scale[c] * (x.data[i] - p.layers[0].bn_mean[c]) * is +
                                    p.layers[0].bn_shift[c];
                CHECK(rel_err(want, y.data[i]) < 1e-6);
            }
}

TEST_CASE("train-mode BN updates running stats with momentum 0.1") {
    NetworkSpec net;
    net.input_shape = {1, 1, 2};
    net.num_classes = 0;
    net.layers.push_back(LayerSpec::batchnorm(1));
    ParamStore p = init_params(net, 0);  // mean 0, var 1
    Tensor x({2, 1, 1, 2}, {1.0f, 3.0f, 5.0f, 7.0f});  // mean 4, biased var 5
    forward<float>(net, p, nullptr, x, Mode::Train, nullptr, true);
    CHECK(p.layers[0].bn_mean[0] == doctest::Approx(0.9f * 0.0f + 0.1f * 4.0f));
    CHECK(p.layers[0].bn_var[0] == doctest::Approx(0.9f * 1.0f + 0.1f * 5.0f));
}

TEST_CASE("forward logits are batch-permutation equivariant") {
    NetworkSpec net = every_kind_net();
    ParamStore p = init_params(net, 13);
    std::mt19937_64 rng(13);
    const Tensor x = random_tensor<float>({4, 2, 6, 6}, rng);
    const std::size_t order[4] = {3, 1, 0, 2};
    Tensor xp(x.shape);
    const std::size_t stride = x.numel() / 4;
    for (std::size_t b = 0; b < 4; ++b)
        std::copy_n(x.data.data() + order[b] * stride, stride, xp.data.data() + b * stride);
    ParamStore p2 = p;
    const Tensor a = forward<float>(net, p, nullptr, x, Mode::Train, nullptr, false);
    const Tensor b = forward<float>(net, p2, nullptr, xp, Mode::Train, nullptr, false);
    const std::size_t C = a.extent(1);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t c = 0; c < C; ++c)
            CHECK(rel_err(a.data[order[i] * C + c], b.data[i * C + c]) < 1e-5);
}

TEST_CASE("checkpoint round trip preserves every value exactly") {
    NetworkSpec net = every_kind_net();
    ParamStore p = init_params(net, 77);
    const std::string path = "test_ckpt.drsw";
    save_checkpoint(path, net, p);
    const ParamStore q = load_checkpoint(path, net);
    REQUIRE(q.layers.size() == p.layers.size());
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        CHECK(q.layers[i].weight.data == p.layers[i].weight.data);
        CHECK(q.layers[i].bias.data == p.layers[i].bias.data);
        CHECK(q.layers[i].bn_scale.data == p.layers[i].bn_scale.data);
        CHECK(q.layers[i].bn_mean.data == p.layers[i].bn_mean.data);
        CHECK(q.layers[i].bn_var.data == p.layers[i].bn_var.data);
    }
    std::remove(path.c_str());
}

TEST_CASE("stale cache is rejected after a parameter update") {
    NetworkSpec net;
    net.input_shape = {3};
    net.num_classes = 2;
    net.layers.push_back(LayerSpec::fc(3, 2));
    ParamStore p = init_params(net, 1);
    ParamStore vel = zero_like(p);
    Tensor x({1, 3}, {1.0f, 2.0f, 3.0f});
    ForwardCache cache;
    const Tensor logits = forward<float>(net, p, nullptr, x, Mode::Train, &cache);
    auto [loss, lgrad] = cross_entropy_loss(logits, {1});
    (void)loss;
    GradStore g = backward<float>(net, p, cache, lgrad);
    sgd_step<float>(net, p, g, vel, {0.1, 0.9, 0.0, true});
    CHECK_THROWS(backward<float>(net, p, cache, lgrad));
}

TEST_CASE("non-finite activations raise a numeric fault naming the layer") {
    NetworkSpec net;
    net.input_shape = {2};
    net.num_classes = 2;
    net.layers.push_back(LayerSpec::fc(2, 2));
    ParamStore p = init_params(net, 1);
    p.layers[0].weight.data[0] = std::numeric_limits<float>::infinity();
    Tensor x({1, 2}, {1.0f, 1.0f});
    CHECK_THROWS_AS(forward<float>(net, p, nullptr, x, Mode::Eval, nullptr), NumericError);
}

TEST_CASE("shape mismatches are rejected") {
    NetworkSpec net;
    net.input_shape = {3};
    net.num_classes = 2;
    net.layers.push_back(LayerSpec::fc(3, 2));
    ParamStore p = init_params(net, 1);
    Tensor bad({1, 4});
    CHECK_THROWS_AS(forward<float>(net, p, nullptr, bad, Mode::Eval, nullptr), ShapeError);
}

}  // TEST_SUITE
