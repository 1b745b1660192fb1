#pragma once

#include <string>

#include "dress/net.hpp"

namespace dress {

// Binary checkpoint, little-endian: magic "DRSW", format version u32, layer
// count u32, then per tensor (rank u32, extents u32[], raw f32 data) in
// canonical per-layer order (weight, bias, bn_scale, bn_shift, bn_mean,
// bn_var, present tensors only; presence is derived from the NetworkSpec).
void save_checkpoint(const std::string& path, const NetworkSpec& net, const ParamStore& params);
ParamStore load_checkpoint(const std::string& path, const NetworkSpec& net);

}  // namespace dress
