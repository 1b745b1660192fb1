#pragma once

#include <string>
#include <vector>

#include "dress/net.hpp"

namespace dress {

/// MLP over flat inputs: dims = {in, hidden..., classes}, relu between.
NetworkSpec make_mlp(const std::vector<int>& dims);

/// Small conv net for image-shaped desk runs:
/// conv3x3(c)-bn-relu-avgpool2-conv3x3(2c)-bn-relu-avgpool2-flatten-fc.
NetworkSpec make_tiny_conv(int in_channels, int image_size, int base_channels, int classes);

/// CIFAR-style ResNet20 with 1x1-conv downsample shortcuts.
NetworkSpec make_resnet20(int classes = 10);

/// Torchvision-style ResNet50 (stride-2 in the 3x3 bottleneck conv).
NetworkSpec make_resnet50(int classes = 1000);

/// Lookup by name: "mlp", "tinyconv", "resnet20", "resnet50".
NetworkSpec make_arch(const std::string& name);

}  // namespace dress
