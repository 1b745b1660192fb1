#include "dress/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "dress/error.hpp"

namespace dress {

namespace {

constexpr char kMagic[4] = {'D', 'R', 'S', 'W'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw FormatError("checkpoint truncated");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_tensor(std::ostream& os, const Tensor& t) {
    put_u32(os, static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t e : t.shape) put_u32(os, static_cast<std::uint32_t>(e));
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(float)));
}

Tensor get_tensor(std::istream& is) {
    const std::uint32_t rank = get_u32(is);
    if (rank > 8) throw FormatError("checkpoint tensor rank implausible");
    std::vector<std::size_t> shape(rank);
    for (auto& e : shape) e = get_u32(is);
    Tensor t(shape);
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    if (!is) throw FormatError("checkpoint truncated");
    return t;
}

template <typename Fn>
void for_each_tensor_slot(const NetworkSpec& net, ParamStore& params, Fn&& fn) {
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& l = net.layers[i];
        LayerParamsT<float>& p = params.layers[i];
        if (l.kind == LayerKind::FullyConnected || l.kind == LayerKind::Conv2d) {
            fn(p.weight);
            if (l.has_bias) fn(p.bias);
        } else if (l.kind == LayerKind::BatchNorm) {
            fn(p.bn_scale);
            fn(p.bn_shift);
            fn(p.bn_mean);
            fn(p.bn_var);
        }
    }
}

}  // namespace

void save_checkpoint(const std::string& path, const NetworkSpec& net, const ParamStore& params) {
    if (params.layers.size() != net.layers.size())
        throw ShapeError("checkpoint: param store does not match network");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open checkpoint for writing: " + path);
    os.write(kMagic, 4);
    put_u32(os, kVersion);
    put_u32(os, static_cast<std::uint32_t>(net.layers.size()));
    ParamStore& mut = const_cast<ParamStore&>(params);
    for_each_tensor_slot(net, mut, [&](Tensor& t) { put_tensor(os, t); });
    if (!os) throw Error("checkpoint write failed: " + path);
}

ParamStore load_checkpoint(const std::string& path, const NetworkSpec& net) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open checkpoint: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad checkpoint magic");
    const std::uint32_t version = get_u32(is);
    if (version != kVersion) throw FormatError("unsupported checkpoint version");
    const std::uint32_t layer_count = get_u32(is);
    if (layer_count != net.layers.size())
        throw FormatError("checkpoint layer count does not match network");

    ParamStore params = init_params(net, 0);
    for_each_tensor_slot(net, params, [&](Tensor& t) {
        Tensor loaded = get_tensor(is);
        if (loaded.shape != t.shape) throw FormatError("checkpoint tensor shape mismatch");
        t = std::move(loaded);
    });
    return params;
}

}  // namespace dress
