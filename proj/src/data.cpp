#include "dress/data.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include <zlib.h>

#include "dress/error.hpp"

namespace dress {

Tensor Dataset::gather(const std::vector<std::size_t>& indices) const {
    const std::size_t stride = sample_numel();
    std::vector<std::size_t> shape = images.shape;
    shape[0] = indices.size();
    Tensor out(shape);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= size()) throw ShapeError("gather index out of range");
        std::copy_n(images.data.data() + indices[i] * stride, stride,
                    out.data.data() + i * stride);
    }
    return out;
}

std::vector<int> Dataset::gather_labels(const std::vector<std::size_t>& indices) const {
    std::vector<int> out(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) out[i] = labels[indices[i]];
    return out;
}

namespace {

std::uint32_t read_be32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw FormatError("IDX file truncated");
    return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
           (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

void write_be32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

Tensor load_idx_images(const std::string& path, float mean, float stddev) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open IDX file: " + path);
    if (read_be32(is) != 0x00000803u) throw FormatError("bad IDX image magic");
    const std::uint32_t n = read_be32(is);
    const std::uint32_t rows = read_be32(is);
    const std::uint32_t cols = read_be32(is);
    std::vector<unsigned char> raw(static_cast<std::size_t>(n) * rows * cols);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!is) throw FormatError("IDX image payload truncated");

    Tensor out({n, 1, rows, cols});
    for (std::size_t i = 0; i < raw.size(); ++i)
        out.data[i] = (static_cast<float>(raw[i]) / 255.0f - mean) / stddev;
    return out;
}

std::vector<int> load_idx_labels(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open IDX file: " + path);
    if (read_be32(is) != 0x00000801u) throw FormatError("bad IDX label magic");
    const std::uint32_t n = read_be32(is);
    std::vector<unsigned char> raw(n);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!is) throw FormatError("IDX label payload truncated");
    return std::vector<int>(raw.begin(), raw.end());
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path, int num_classes,
                 float mean, float stddev) {
    Dataset d;
    d.images = load_idx_images(images_path, mean, stddev);
    d.labels = load_idx_labels(labels_path);
    d.num_classes = num_classes;
    if (d.images.extent(0) != d.labels.size())
        throw FormatError("IDX label count does not match image count");
    for (int y : d.labels)
        if (y < 0 || y >= num_classes) throw FormatError("IDX label out of class range");
    return d;
}

void save_idx_images(const std::string& path, const Tensor& images) {
    if (images.shape.size() != 4) throw ShapeError("save_idx_images expects (n, 1, h, w)");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open IDX file for writing: " + path);
    write_be32(os, 0x00000803u);
    write_be32(os, static_cast<std::uint32_t>(images.extent(0)));
    write_be32(os, static_cast<std::uint32_t>(images.extent(2)));
    write_be32(os, static_cast<std::uint32_t>(images.extent(3)));
    for (float v : images.data) {
        const float clamped = std::min(1.0f, std::max(0.0f, v));
        os.put(static_cast<char>(static_cast<unsigned char>(std::lround(clamped * 255.0f))));
    }
}

void save_idx_labels(const std::string& path, const std::vector<int>& labels) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open IDX file for writing: " + path);
    write_be32(os, 0x00000801u);
    write_be32(os, static_cast<std::uint32_t>(labels.size()));
    for (int y : labels) os.put(static_cast<char>(static_cast<unsigned char>(y)));
}

namespace {

Dataset gen_blobs(int classes, const std::vector<std::size_t>& sample_shape, int n,
                  std::uint64_t seed, double spread, double noise) {
    if (classes < 2) throw ConfigError("synthetic data needs at least 2 classes");
    if (n <= 0) throw ConfigError("synthetic data needs n > 0");
    std::size_t dim = 1;
    for (auto e : sample_shape) dim *= e;

    // Class means depend only on (classes, dim), not on the sample seed.
    std::mt19937_64 mean_rng(0x9e3779b97f4a7c15ull ^ (static_cast<std::uint64_t>(classes) << 32) ^
                             dim);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::vector<float>> means(static_cast<std::size_t>(classes),
                                          std::vector<float>(dim));
    for (auto& m : means)
        for (auto& v : m) v = static_cast<float>(gauss(mean_rng) * spread);

    std::mt19937_64 rng(seed);
    Dataset d;
    std::vector<std::size_t> shape;
    shape.push_back(static_cast<std::size_t>(n));
    shape.insert(shape.end(), sample_shape.begin(), sample_shape.end());
    d.images = Tensor(shape);
    d.labels.resize(static_cast<std::size_t>(n));
    d.num_classes = classes;
    std::uniform_int_distribution<int> cls(0, classes - 1);
    for (int i = 0; i < n; ++i) {
        const int y = cls(rng);
        d.labels[static_cast<std::size_t>(i)] = y;
        float* row = d.images.data.data() + static_cast<std::size_t>(i) * dim;
        const std::vector<float>& m = means[static_cast<std::size_t>(y)];
        for (std::size_t j = 0; j < dim; ++j)
            row[j] = m[j] + static_cast<float>(gauss(rng) * noise);
    }
    return d;
}

}  // namespace

Dataset gen_synthetic(int classes, int dim, int n, std::uint64_t seed, double spread,
                      double noise) {
    return gen_blobs(classes, {static_cast<std::size_t>(dim)}, n, seed, spread, noise);
}

Dataset gen_synthetic_images(int classes, int channels, int image_size, int n,
                             std::uint64_t seed, double spread, double noise) {
    return gen_blobs(classes,
                     {static_cast<std::size_t>(channels), static_cast<std::size_t>(image_size),
                      static_cast<std::size_t>(image_size)},
                     n, seed, spread, noise);
}

std::pair<Dataset, Dataset> split_val(const Dataset& data, double fraction, std::uint64_t seed) {
    if (fraction <= 0.0 || fraction >= 1.0) throw ConfigError("split fraction must be in (0,1)");
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t n_val =
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(data.size())));
    std::vector<std::size_t> val_idx(idx.begin(), idx.begin() + static_cast<long>(n_val));
    std::vector<std::size_t> test_idx(idx.begin() + static_cast<long>(n_val), idx.end());

    Dataset val{data.gather(val_idx), data.gather_labels(val_idx), data.num_classes};
    Dataset test{data.gather(test_idx), data.gather_labels(test_idx), data.num_classes};
    return {std::move(val), std::move(test)};
}

std::uint32_t dataset_content_hash(const Dataset& data) {
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data.images.data.data()),
                static_cast<uInt>(data.images.data.size() * sizeof(float)));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data.labels.data()),
                static_cast<uInt>(data.labels.size() * sizeof(int)));
    return static_cast<std::uint32_t>(crc);
}

}  // namespace dress
