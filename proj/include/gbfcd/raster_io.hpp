#pragma once

#include <filesystem>
#include <optional>

#include "gbfcd/raster.hpp"

namespace gbfcd {

struct LoadOptions {
  /// Band to read from multi-band files. Required when the file has more than one band.
  std::optional<int> band;
  /// Rescale intensities to [0,1] by global min-max after loading.
  bool normalize = false;
};

/// Reads PGM (P2/P5), PNG (8/16-bit), TIFF/GeoTIFF (uint8/uint16/float32) or GBFR raw.
/// Integer samples are mapped verbatim to double.
RasterImage load_raster(const std::filesystem::path& path, const LoadOptions& options = {});

/// Pixels equal to `changed_value` become changed; at most one other value is allowed.
ChangeMask load_mask(const std::filesystem::path& path, double changed_value = 255.0);
ChangeMask mask_from_raster(const RasterImage& raster, double changed_value);

/// Blue = missed alarm, red = false alarm, green = correct change, white = both unchanged.
RgbImage render_error_map(const ChangeMask& pred, const ChangeMask& ref);

namespace colors {
inline constexpr Rgb missed_alarm{0, 0, 255};
inline constexpr Rgb false_alarm{255, 0, 0};
inline constexpr Rgb correct_change{0, 255, 0};
inline constexpr Rgb background{255, 255, 255};
}  // namespace colors

enum class TiffSample { uint8, uint16, float32 };

// Writers. All of them write to a temporary file and rename it into place.
// Integer writers require integral values inside the target range.
void write_png(const std::filesystem::path& path, const RasterImage& image, int bit_depth = 8);
void write_mask_png(const std::filesystem::path& path, const ChangeMask& mask);
void write_rgb_png(const std::filesystem::path& path, const RgbImage& image);
void write_pgm(const std::filesystem::path& path, const RasterImage& image, int maxval = 255);
void write_tiff(const std::filesystem::path& path, const RasterImage& image, TiffSample sample);
void write_raw(const std::filesystem::path& path, const RasterImage& image);
/// Dumps a matrix as GBFR raw with width = cols, height = rows.
void write_raw(const std::filesystem::path& path, const MatrixX<double>& matrix);

/// Writes `contents` to `path` via temp file + rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace gbfcd
