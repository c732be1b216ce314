#pragma once

#include <cstdint>
#include <string>

#include "gbfcd/raster.hpp"

namespace gbfcd {

enum class ChangeShape { rect, disk };

ChangeShape parse_shape(const std::string& name);
std::string to_string(ChangeShape shape);

/// Test scene: horizontal gradient 0 -> 1 plus noise; the post image adds `shift`
/// inside a centred rectangle (shape_width x shape_height) or disk (diameter shape_width).
struct SyntheticSpec {
  Index width = 64;
  Index height = 64;
  ChangeShape shape = ChangeShape::rect;
  Index shape_width = 16;
  Index shape_height = 16;
  double shift = 0.4;
  double noise_sd = 0.05;
  std::uint64_t seed = 1;
};

struct SyntheticScene {
  RasterImage pre;
  RasterImage post;
  ChangeMask ref;
};

SyntheticScene generate_synthetic(const SyntheticSpec& spec);

}  // namespace gbfcd
