#include "dress/dress_csr.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <zlib.h>

#include "dress/error.hpp"

namespace dress {

namespace {

constexpr char kMagic[4] = {'D', 'R', 'S', '1'};
constexpr std::uint32_t kVersion = 1;

struct Writer {
    std::vector<std::uint8_t> buf;

    void u8(std::uint8_t v) { buf.push_back(v); }
    void u16(std::uint16_t v) {
        buf.push_back(static_cast<std::uint8_t>(v));
        buf.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        buf.insert(buf.end(), b, b + n);
    }
};

struct Reader {
    const std::vector<std::uint8_t>& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw FormatError("DRESS-CSR file truncated");
    }
    std::uint8_t u8() {
        need(1);
        return buf[pos++];
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(buf[pos] | (buf[pos + 1] << 8));
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    float f32() {
        std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
};

void validate_layer(const DressCsrLayer& l, std::uint32_t K) {
    if (l.prefix_counts.size() != K) throw FormatError("prefix count list length mismatch");
    for (std::size_t k = 0; k < l.prefix_counts.size(); ++k) {
        if (l.prefix_counts[k] > l.row_size)
            throw FormatError("prefix count exceeds row size");
        if (k > 0 && l.prefix_counts[k] > l.prefix_counts[k - 1])
            throw FormatError("prefix counts must be non-increasing");
    }
    const std::size_t stride = l.row_stride();
    if (l.col_indices.size() != l.rows * stride || l.values.size() != l.rows * stride)
        throw FormatError("table size does not match rows * prefix");
    std::vector<std::uint8_t> seen(l.row_size);
    for (std::size_t r = 0; r < l.rows; ++r) {
        std::fill(seen.begin(), seen.end(), 0);
        for (std::size_t j = 0; j < stride; ++j) {
            const std::uint32_t c = l.col_indices[r * stride + j];
            if (c >= l.row_size) throw FormatError("column index out of range");
            if (seen[c]) throw FormatError("duplicate column index in row");
            seen[c] = 1;
        }
    }
}

}  // namespace

DressCsrModel build_dress_csr(const NetworkSpec& net, const ParamStore& params,
                              const MaskSet& masks) {
    if (!masks_nested(masks)) throw FormatError("build_dress_csr: masks are not nested");
    const std::vector<int> sampled = net.sampled_layers();
    const std::size_t K = masks.num_levels();
    if (K == 0) throw ConfigError("build_dress_csr: no mask levels");

    DressCsrModel model;
    model.num_levels = static_cast<std::uint32_t>(K);

    for (std::size_t li = 0; li < sampled.size(); ++li) {
        const int layer = sampled[li];
        const RowView view = reshape_rows(net, layer);
        const Tensor& w = params.layers[static_cast<std::size_t>(layer)].weight;

        DressCsrLayer out;
        out.layer_id = static_cast<std::uint32_t>(layer);
        out.name = net.layers[static_cast<std::size_t>(layer)].name.empty()
                       ? "layer" + std::to_string(layer)
                       : net.layers[static_cast<std::size_t>(layer)].name;
        out.rows = static_cast<std::uint32_t>(view.rows);
        out.row_size = static_cast<std::uint32_t>(view.row_size);

        // Row-uniform counts per level, verified across rows.
        out.prefix_counts.resize(K);
        for (std::size_t k = 0; k < K; ++k) {
            const auto& m = masks.levels[k][static_cast<std::size_t>(layer)];
            if (m.size() != w.numel()) throw FormatError("mask shape mismatch in build");
            std::size_t first_row = 0;
            for (std::size_t c = 0; c < view.row_size; ++c) first_row += m[c] ? 1 : 0;
            for (std::size_t r = 1; r < view.rows; ++r) {
                std::size_t cnt = 0;
                for (std::size_t c = 0; c < view.row_size; ++c)
                    cnt += m[r * view.row_size + c] ? 1 : 0;
                if (cnt != first_row) throw FormatError("masks are not row-uniform");
            }
            out.prefix_counts[k] = static_cast<std::uint32_t>(first_row);
        }

        const std::size_t stride = out.row_stride();
        out.col_indices.resize(view.rows * stride);
        out.values.resize(view.rows * stride);

        // Membership level of each column: how many masks select it. Nesting
        // makes this well defined; ordering by (membership desc, |w| desc,
        // col asc) puts every level's support in a prefix.
        std::vector<std::size_t> order;
        for (std::size_t r = 0; r < view.rows; ++r) {
            order.clear();
            for (std::size_t c = 0; c < view.row_size; ++c) {
                if (masks.levels[0][static_cast<std::size_t>(layer)][r * view.row_size + c])
                    order.push_back(c);
            }
            auto membership = [&](std::size_t c) {
                std::size_t depth = 0;
                for (std::size_t k = 0; k < K; ++k)
                    depth += masks.levels[k][static_cast<std::size_t>(layer)]
                                       [r * view.row_size + c]
                                 ? 1
                                 : 0;
                return depth;
            };
            const float* wr = w.data.data() + r * view.row_size;
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                const std::size_t da = membership(a), db = membership(b);
                if (da != db) return da > db;
                const float ma = std::fabs(wr[a]), mb = std::fabs(wr[b]);
                if (ma != mb) return ma > mb;
                return a < b;
            });
            if (order.size() != stride) throw FormatError("mask support/stride mismatch");
            for (std::size_t j = 0; j < stride; ++j) {
                out.col_indices[r * stride + j] = static_cast<std::uint32_t>(order[j]);
                out.values[r * stride + j] = wr[order[j]];
            }
        }
        model.layers.push_back(std::move(out));
    }

    model.bn_variants = shared_bn_variants(net, params, K);
    return model;
}

SubnetCsr extract_subnet(const DressCsrLayer& layer, std::size_t level) {
    if (level >= layer.prefix_counts.size())
        throw ConfigError("extract_subnet: level out of range");
    SubnetCsr csr;
    csr.rows = layer.rows;
    csr.cols = layer.row_size;
    csr.nnz_per_row = layer.prefix_counts[level];
    csr.row_stride = layer.row_stride();
    csr.col_indices = layer.col_indices.data();
    csr.values = layer.values.data();
    return csr;
}

Tensor densify(const SubnetCsr& csr) {
    Tensor out({csr.rows, csr.cols});
    for (std::size_t r = 0; r < csr.rows; ++r) {
        const std::uint32_t* cols = csr.row_cols(r);
        const float* vals = csr.row_vals(r);
        for (std::size_t j = 0; j < csr.nnz_per_row; ++j) out.data[r * csr.cols + cols[j]] = vals[j];
    }
    return out;
}

std::vector<BnVariant> shared_bn_variants(const NetworkSpec& net, const ParamStore& params,
                                          std::size_t num_levels) {
    BnVariant shared;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (net.layers[i].kind != LayerKind::BatchNorm) continue;
        shared.scale.push_back(params.layers[i].bn_scale);
        shared.shift.push_back(params.layers[i].bn_shift);
        shared.mean.push_back(params.layers[i].bn_mean);
        shared.var.push_back(params.layers[i].bn_var);
    }
    return std::vector<BnVariant>(num_levels, shared);
}

void set_bn_variant(DressCsrModel& model, std::size_t level, BnVariant variant) {
    if (level >= model.bn_variants.size()) throw ConfigError("BN variant level out of range");
    model.bn_variants[level] = std::move(variant);
}

void apply_bn_variant(const NetworkSpec& net, ParamStore& params, const BnVariant& variant) {
    std::size_t bi = 0;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (net.layers[i].kind != LayerKind::BatchNorm) continue;
        if (bi >= variant.scale.size()) throw ShapeError("BN variant missing layers");
        params.layers[i].bn_scale = variant.scale[bi];
        params.layers[i].bn_shift = variant.shift[bi];
        params.layers[i].bn_mean = variant.mean[bi];
        params.layers[i].bn_var = variant.var[bi];
        ++bi;
    }
}

std::vector<std::uint8_t> serialize(const DressCsrModel& model) {
    Writer w;
    w.bytes(kMagic, 4);
    w.u32(kVersion);
    w.u32(model.num_levels);
    w.u32(static_cast<std::uint32_t>(model.layers.size()));

    for (const DressCsrLayer& l : model.layers) {
        validate_layer(l, model.num_levels);
        w.u16(static_cast<std::uint16_t>(l.name.size()));
        w.bytes(l.name.data(), l.name.size());
        w.u32(l.layer_id);
        w.u32(l.rows);
        w.u32(l.row_size);
        for (std::uint32_t c : l.prefix_counts) w.u32(c);
        const std::uint8_t width = l.row_size <= 256 ? 1 : 2;
        w.u8(width);
        for (std::uint32_t c : l.col_indices) {
            if (width == 1)
                w.u8(static_cast<std::uint8_t>(c));
            else
                w.u16(static_cast<std::uint16_t>(c));
        }
        for (float v : l.values) w.f32(v);
    }

    if (model.bn_variants.size() != model.num_levels)
        throw FormatError("BN variant count must equal K");
    const std::uint32_t bn_layers =
        model.bn_variants.empty() ? 0
                                  : static_cast<std::uint32_t>(model.bn_variants[0].scale.size());
    w.u32(bn_layers);
    for (const BnVariant& var : model.bn_variants) {
        if (var.scale.size() != bn_layers || var.shift.size() != bn_layers ||
            var.mean.size() != bn_layers || var.var.size() != bn_layers)
            throw FormatError("inconsistent BN variant layer counts");
        for (std::size_t b = 0; b < bn_layers; ++b) {
            for (const Tensor* t : {&var.scale[b], &var.shift[b], &var.mean[b], &var.var[b]}) {
                w.u32(static_cast<std::uint32_t>(t->numel()));
                for (float v : t->data) w.f32(v);
            }
        }
    }

    const std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(w.buf.data()), static_cast<uInt>(w.buf.size())));
    w.u32(crc);
    return std::move(w.buf);
}

DressCsrModel deserialize(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8) throw FormatError("DRESS-CSR file too small");
    const std::uint32_t stored_crc =
        static_cast<std::uint32_t>(bytes[bytes.size() - 4]) |
        (static_cast<std::uint32_t>(bytes[bytes.size() - 3]) << 8) |
        (static_cast<std::uint32_t>(bytes[bytes.size() - 2]) << 16) |
        (static_cast<std::uint32_t>(bytes[bytes.size() - 1]) << 24);
    const std::uint32_t actual_crc = static_cast<std::uint32_t>(crc32(
        0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size() - 4)));
    if (stored_crc != actual_crc) throw FormatError("DRESS-CSR checksum mismatch");

    Reader r{bytes};
    char magic[4];
    r.need(4);
    std::memcpy(magic, bytes.data(), 4);
    r.pos = 4;
    if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad DRESS-CSR magic");
    if (r.u32() != kVersion) throw FormatError("unsupported DRESS-CSR version");

    DressCsrModel model;
    model.num_levels = r.u32();
    if (model.num_levels == 0) throw FormatError("DRESS-CSR has zero levels");
    const std::uint32_t layer_count = r.u32();

    for (std::uint32_t i = 0; i < layer_count; ++i) {
        DressCsrLayer l;
        const std::uint16_t name_len = r.u16();
        r.need(name_len);
        l.name.assign(reinterpret_cast<const char*>(bytes.data() + r.pos), name_len);
        r.pos += name_len;
        l.layer_id = r.u32();
        l.rows = r.u32();
        l.row_size = r.u32();
        l.prefix_counts.resize(model.num_levels);
        for (auto& c : l.prefix_counts) c = r.u32();
        const std::uint8_t width = r.u8();
        if (width != 1 && width != 2) throw FormatError("bad index width");
        if (l.prefix_counts[0] > l.row_size) throw FormatError("prefix count exceeds row size");
        const std::size_t table = static_cast<std::size_t>(l.rows) * l.prefix_counts[0];
        l.col_indices.resize(table);
        for (auto& c : l.col_indices) c = width == 1 ? r.u8() : r.u16();
        l.values.resize(table);
        for (auto& v : l.values) v = r.f32();
        validate_layer(l, model.num_levels);
        model.layers.push_back(std::move(l));
    }

    const std::uint32_t bn_layers = r.u32();
    model.bn_variants.resize(model.num_levels);
    for (auto& var : model.bn_variants) {
        for (std::uint32_t b = 0; b < bn_layers; ++b) {
            for (std::vector<Tensor>* dst : {&var.scale, &var.shift, &var.mean, &var.var}) {
                const std::uint32_t n = r.u32();
                Tensor t({n});
                for (auto& v : t.data) v = r.f32();
                dst->push_back(std::move(t));
            }
        }
    }
    if (r.pos != bytes.size() - 4) throw FormatError("trailing bytes in DRESS-CSR file");
    return model;
}

void save_dress_csr(const std::string& path, const DressCsrModel& model) {
    const std::vector<std::uint8_t> bytes = serialize(model);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open DRESS-CSR file for writing: " + path);
    os.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
    if (!os) throw Error("DRESS-CSR write failed: " + path);
}

DressCsrModel load_dress_csr(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open DRESS-CSR file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                    std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

}  // namespace dress
