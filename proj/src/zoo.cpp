#include "dress/zoo.hpp"

#include "dress/error.hpp"

namespace dress {

NetworkSpec make_mlp(const std::vector<int>& dims) {
    if (dims.size() < 2) throw ConfigError("mlp needs at least input and output dims");
    NetworkSpec net;
    net.input_shape = {static_cast<std::size_t>(dims[0])};
    net.num_classes = dims.back();
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        net.layers.push_back(
            LayerSpec::fc(dims[i], dims[i + 1], "fc" + std::to_string(i + 1)));
        if (i + 2 < dims.size()) net.layers.push_back(LayerSpec::relu());
    }
    net.validate();
    return net;
}

NetworkSpec make_tiny_conv(int in_channels, int image_size, int base_channels, int classes) {
    NetworkSpec net;
    net.input_shape = {static_cast<std::size_t>(in_channels),
                       static_cast<std::size_t>(image_size),
                       static_cast<std::size_t>(image_size)};
    net.num_classes = classes;
    const int c1 = base_channels, c2 = 2 * base_channels;
    net.layers.push_back(LayerSpec::conv(in_channels, c1, 3, 1, 1, "conv1"));
    net.layers.push_back(LayerSpec::batchnorm(c1, "bn1"));
    net.layers.push_back(LayerSpec::relu());
    net.layers.push_back(LayerSpec::avgpool(2));
    net.layers.push_back(LayerSpec::conv(c1, c2, 3, 1, 1, "conv2"));
    net.layers.push_back(LayerSpec::batchnorm(c2, "bn2"));
    net.layers.push_back(LayerSpec::relu());
    net.layers.push_back(LayerSpec::avgpool(2));
    net.layers.push_back(LayerSpec::flatten());
    const int feat = c2 * (image_size / 4) * (image_size / 4);
    net.layers.push_back(LayerSpec::fc(feat, classes, "fc"));
    net.validate();
    return net;
}

namespace {

struct Builder {
    NetworkSpec net;

    int last() const { return static_cast<int>(net.layers.size()) - 1; }

    int add(LayerSpec l, int input = -2) {
        l.input = input;
        net.layers.push_back(std::move(l));
        return last();
    }

    // CIFAR basic block. Returns the index of the closing relu.
    int basic_block(int in_idx, int in_c, int out_c, int stride, const std::string& tag) {
        const int c1 = add(LayerSpec::conv(in_c, out_c, 3, stride, 1, tag + ".conv1"), in_idx);
        const int b1 = add(LayerSpec::batchnorm(out_c, tag + ".bn1"), c1);
        const int r1 = add(LayerSpec::relu(), b1);
        const int c2 = add(LayerSpec::conv(out_c, out_c, 3, 1, 1, tag + ".conv2"), r1);
        const int b2 = add(LayerSpec::batchnorm(out_c, tag + ".bn2"), c2);
        int shortcut = in_idx;
        if (stride != 1 || in_c != out_c) {
            const int dc =
                add(LayerSpec::conv(in_c, out_c, 1, stride, 0, tag + ".down.conv"), in_idx);
            shortcut = add(LayerSpec::batchnorm(out_c, tag + ".down.bn"), dc);
        }
        const int sum = add(LayerSpec::residual_add(shortcut), b2);
        return add(LayerSpec::relu(), sum);
    }

    // Bottleneck block (1x1 -> 3x3 stride -> 1x1 expand x4).
    int bottleneck(int in_idx, int in_c, int mid_c, int stride, const std::string& tag) {
        const int out_c = 4 * mid_c;
        const int c1 = add(LayerSpec::conv(in_c, mid_c, 1, 1, 0, tag + ".conv1"), in_idx);
        const int b1 = add(LayerSpec::batchnorm(mid_c, tag + ".bn1"), c1);
        const int r1 = add(LayerSpec::relu(), b1);
        const int c2 = add(LayerSpec::conv(mid_c, mid_c, 3, stride, 1, tag + ".conv2"), r1);
        const int b2 = add(LayerSpec::batchnorm(mid_c, tag + ".bn2"), c2);
        const int r2 = add(LayerSpec::relu(), b2);
        const int c3 = add(LayerSpec::conv(mid_c, out_c, 1, 1, 0, tag + ".conv3"), r2);
        const int b3 = add(LayerSpec::batchnorm(out_c, tag + ".bn3"), c3);
        int shortcut = in_idx;
        if (stride != 1 || in_c != out_c) {
            const int dc =
                add(LayerSpec::conv(in_c, out_c, 1, stride, 0, tag + ".down.conv"), in_idx);
            shortcut = add(LayerSpec::batchnorm(out_c, tag + ".down.bn"), dc);
        }
        const int sum = add(LayerSpec::residual_add(shortcut), b3);
        return add(LayerSpec::relu(), sum);
    }
};

}  // namespace

NetworkSpec make_resnet20(int classes) {
    Builder b;
    b.net.input_shape = {3, 32, 32};
    b.net.num_classes = classes;
    int idx = b.add(LayerSpec::conv(3, 16, 3, 1, 1, "conv1"), -1);
    idx = b.add(LayerSpec::batchnorm(16, "bn1"), idx);
    idx = b.add(LayerSpec::relu(), idx);
    const int widths[3] = {16, 32, 64};
    int in_c = 16;
    for (int stage = 0; stage < 3; ++stage) {
        for (int block = 0; block < 3; ++block) {
            const int stride = (stage > 0 && block == 0) ? 2 : 1;
            idx = b.basic_block(idx, in_c, widths[stage],
                                stride, "s" + std::to_string(stage + 1) + ".b" +
                                            std::to_string(block + 1));
            in_c = widths[stage];
        }
    }
    idx = b.add(LayerSpec::avgpool(8), idx);
    idx = b.add(LayerSpec::flatten(), idx);
    b.add(LayerSpec::fc(64, classes, "fc"), idx);
    b.net.validate();
    return b.net;
}

NetworkSpec make_resnet50(int classes) {
    Builder b;
    b.net.input_shape = {3, 224, 224};
    b.net.num_classes = classes;
    int idx = b.add(LayerSpec::conv(3, 64, 7, 2, 3, "conv1"), -1);
    idx = b.add(LayerSpec::batchnorm(64, "bn1"), idx);
    idx = b.add(LayerSpec::relu(), idx);
    // Stand-in for the stem max-pool; same geometry, no parameters.
    idx = b.add(LayerSpec::avgpool(3, 2, 1, "pool1"), idx);
    const int blocks[4] = {3, 4, 6, 3};
    const int mids[4] = {64, 128, 256, 512};
    int in_c = 64;
    for (int stage = 0; stage < 4; ++stage) {
        for (int block = 0; block < blocks[stage]; ++block) {
            const int stride = (stage > 0 && block == 0) ? 2 : 1;
            idx = b.bottleneck(idx, in_c, mids[stage], stride,
                               "s" + std::to_string(stage + 1) + ".b" +
                                   std::to_string(block + 1));
            in_c = 4 * mids[stage];
        }
    }
    idx = b.add(LayerSpec::avgpool(7), idx);
    idx = b.add(LayerSpec::flatten(), idx);
    b.add(LayerSpec::fc(2048, classes, "fc"), idx);
    b.net.validate();
    return b.net;
}

NetworkSpec make_arch(const std::string& name) {
    if (name == "mlp") return make_mlp({784, 256, 128, 10});
    if (name == "tinyconv") return make_tiny_conv(1, 16, 8, 10);
    if (name == "resnet20") return make_resnet20();
    if (name == "resnet50") return make_resnet50();
    throw ConfigError("unknown architecture: " + name);
}

}  // namespace dress
