#include "gbfcd/synthetic.hpp"

#include "gbfcd/sampling.hpp"

namespace gbfcd {

ChangeShape parse_shape(const std::string& name) {
  if (name == "rect") return ChangeShape::rect;
  if (name == "disk") return ChangeShape::disk;
  throw config_error("cli", "unknown change shape '" + name + "' (expected rect or disk)");
}

std::string to_string(ChangeShape shape) { return shape == ChangeShape::rect ? "rect" : "disk"; }

SyntheticScene generate_synthetic(const SyntheticSpec& spec) {
  if (spec.width < 1 || spec.height < 1) throw config_error("cli", "synthetic image must be at least 1x1");
  if (!(spec.noise_sd >= 0.0)) throw config_error("cli", "noise_sd must be non-negative");
  const Index sw = spec.shape_width;
  const Index sh = spec.shape == ChangeShape::rect ? spec.shape_height : spec.shape_width;
  if (sw < 1 || sh < 1 || sw > spec.width || sh > spec.height) throw config_error("cli", "change shape does not fit inside the image");

  SyntheticScene scene{RasterImage(spec.width, spec.height), RasterImage(spec.width, spec.height), ChangeMask(spec.width, spec.height)};
  const Index x0 = (spec.width - sw) / 2;
  const Index y0 = (spec.height - sh) / 2;
  const double cx = x0 + sw / 2.0;
  const double cy = y0 + sh / 2.0;
  const double radius = sw / 2.0;
  for (Index r = 0; r < spec.height; ++r) {
    for (Index c = 0; c < spec.width; ++c) {
      bool inside = false;
      if (spec.shape == ChangeShape::rect) {
        inside = r >= y0 && r < y0 + sh && c >= x0 && c < x0 + sw;
      } else {
        const double dx = c + 0.5 - cx, dy = r + 0.5 - cy;
        inside = dx * dx + dy * dy <= radius * radius;
      }
      scene.ref.changed[r * spec.width + c] = inside;
    }
  }

  Xoshiro256 pre_noise(derive_seed(spec.seed, Stream::synthetic_pre));
  Xoshiro256 post_noise(derive_seed(spec.seed, Stream::synthetic_post));
  for (Index p = 0; p < scene.pre.size(); ++p) {
    const Index c = p % spec.width;
    const double base = spec.width > 1 ? static_cast<double>(c) / static_cast<double>(spec.width - 1) : 0.0;
    const double n1 = spec.noise_sd > 0 ? spec.noise_sd * pre_noise.normal() : 0.0;
    const double n2 = spec.noise_sd > 0 ? spec.noise_sd * post_noise.normal() : 0.0;
    scene.pre.data[p] = base + n1;
    scene.post.data[p] = scene.pre.data[p] + (scene.ref.changed[p] ? spec.shift : 0.0) + n2;
  }
  return scene;
}

}  // namespace gbfcd
