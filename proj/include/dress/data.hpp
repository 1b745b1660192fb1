#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dress/tensor.hpp"

namespace dress {

struct Dataset {
    Tensor images;            // (n, C, H, W) or (n, F)
    std::vector<int> labels;
    int num_classes = 0;

    std::size_t size() const { return labels.size(); }
    std::size_t sample_numel() const { return size() ? images.numel() / size() : 0; }

    Tensor gather(const std::vector<std::size_t>& indices) const;
    std::vector<int> gather_labels(const std::vector<std::size_t>& indices) const;
};

/// Standard big-endian IDX containers (magic 0x00000803 for images,
/// 0x00000801 for labels). Pixels scale to [0,1], then (x - mean) / stddev.
Tensor load_idx_images(const std::string& path, float mean = 0.0f, float stddev = 1.0f);
std::vector<int> load_idx_labels(const std::string& path);
Dataset load_idx(const std::string& images_path, const std::string& labels_path, int num_classes,
                 float mean = 0.0f, float stddev = 1.0f);

void save_idx_images(const std::string& path, const Tensor& images);
void save_idx_labels(const std::string& path, const std::vector<int>& labels);

/// Gaussian class blobs with fixed (classes, dim)-determined means;
/// deterministic per seed, linearly separable at the default spread.
Dataset gen_synthetic(int classes, int dim, int n, std::uint64_t seed, double spread = 1.0,
                      double noise = 0.25);

/// Image-shaped variant for conv nets.
Dataset gen_synthetic_images(int classes, int channels, int image_size, int n,
                             std::uint64_t seed, double spread = 1.0, double noise = 0.25);

/// Disjoint random split: first `fraction` of a seeded shuffle becomes the
/// validation part, the remainder the test part.
std::pair<Dataset, Dataset> split_val(const Dataset& data, double fraction, std::uint64_t seed);

/// CRC32 over image bytes and labels; used in run metadata.
std::uint32_t dataset_content_hash(const Dataset& data);

}  // namespace dress
