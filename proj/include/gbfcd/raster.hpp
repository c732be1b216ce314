#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <vector>

#include "gbfcd/error.hpp"

namespace gbfcd {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Single-band image stored row-major: pixel p = row * width + col.
template <typename Scalar>
struct Raster {
  Index width = 0;
  Index height = 0;
  VectorX<Scalar> data;

  Raster() = default;
  Raster(Index w, Index h) : width(w), height(h), data(VectorX<Scalar>::Zero(w * h)) {}
  Raster(Index w, Index h, VectorX<Scalar> values) : width(w), height(h), data(std::move(values)) {
    if (data.size() != w * h) throw config_error("raster-io", "raster data length does not match width*height");
  }

  Index size() const { return width * height; }
  Scalar& operator()(Index row, Index col) { return data[row * width + col]; }
  Scalar operator()(Index row, Index col) const { return data[row * width + col]; }

  template <typename Other>
  Raster<Other> cast() const {
    return Raster<Other>(width, height, data.template cast<Other>());
  }
};

using RasterImage = Raster<double>;

/// Binary change map; `changed[p]` is true for changed pixels.
struct ChangeMask {
  Index width = 0;
  Index height = 0;
  Eigen::Array<bool, Eigen::Dynamic, 1> changed;

  ChangeMask() = default;
  ChangeMask(Index w, Index h) : width(w), height(h), changed(Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(w * h, false)) {}

  Index size() const { return width * height; }
  Index count_changed() const { return changed.count(); }
};

using Rgb = std::array<std::uint8_t, 3>;

struct RgbImage {
  Index width = 0;
  Index height = 0;
  std::vector<Rgb> pixels;
};

template <typename A, typename B>
bool same_shape(const A& a, const B& b) {
  return a.width == b.width && a.height == b.height;
}

/// Global min-max rescale to [0,1]; a constant raster maps to `constant_value`.
template <typename Scalar>
Raster<Scalar> minmax_scaled(const Raster<Scalar>& image, Scalar constant_value = Scalar(0)) {
  Raster<Scalar> out(image.width, image.height);
  if (image.size() == 0) return out;
  const Scalar lo = image.data.minCoeff();
  const Scalar hi = image.data.maxCoeff();
  if (!(hi > lo)) {
    out.data.setConstant(constant_value);
    return out;
  }
  out.data = (image.data.array() - lo) / (hi - lo);
  return out;
}

}  // namespace gbfcd
