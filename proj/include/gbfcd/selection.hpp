#pragma once

#include <string>
#include <vector>

#include "gbfcd/raster.hpp"
#include "gbfcd/sampling.hpp"
#include "gbfcd/spectral.hpp"

namespace gbfcd {

enum class DiffMode { abs, signed_diff };
enum class MiOn { raw, thresholded };

DiffMode parse_diff_mode(const std::string& name);
MiOn parse_mi_on(const std::string& name);
std::string to_string(DiffMode mode);
std::string to_string(MiOn mode);

/// |post - pre| (or post - pre in signed mode), min-max scaled to [0,1]; constant gives zeros.
RasterImage difference_image(const RasterImage& pre, const RasterImage& post, DiffMode mode = DiffMode::abs);

/// Bin of a value in [0,1] for a uniform `bins`-cell partition; 1.0 falls in the last bin.
int histogram_bin(double value, int bins);

/// Plug-in entropy (nats) of the `bins`-cell histogram of an image in [0,1].
double histogram_entropy(const RasterImage& image, int bins = 64);

/// Plug-in mutual information (nats) from a bins x bins joint histogram over [0,1]^2.
double mutual_information(const RasterImage& a, const RasterImage& b, int bins = 64);

struct MICurve {
  std::vector<double> mi_nats;
  Index selected = 0;
};

struct SelectionOptions {
  int bins = 64;
  MiOn mi_on = MiOn::raw;
};

/// MI of every retained eigen-image against `diff`; selected is the argmax (smallest index on ties).
MICurve select_eigenvector(const EigenSystem<double>& e, const RasterImage& diff, const SampleSet& samples,
                           const SelectionOptions& options = {});

struct Threshold {
  /// Cut bin in [1, 255]: pixels in bins >= cut form the upper class.
  int cut = 0;
  /// Threshold value in image units (lo + cut * (hi - lo) / 256).
  double value = 0.0;
};

/// Otsu's method on a 256-bin histogram spanning [min, max] of the image.
Threshold otsu_threshold(const RasterImage& image);

/// Kittler-Illingworth minimum-error threshold on a 256-bin histogram spanning [min, max].
Threshold ki_threshold_value(const RasterImage& image);

/// Membership of the upper class for a threshold computed on `image`.
ChangeMask upper_class(const RasterImage& image, const Threshold& t);

/// Otsu split of the eigen-image; the class with the larger mean of `diff` is changed.
ChangeMask threshold_map(const RasterImage& eigen_img, const RasterImage& diff);

/// Kittler-Illingworth baseline on the difference image; upper class is changed.
ChangeMask ki_threshold(const RasterImage& diff);

}  // namespace gbfcd
