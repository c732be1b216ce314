#include "gbfcd/raster_io.hpp"

#include <png.h>
#include <tiffio.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <memory>
#include <set>
#include <sstream>

namespace gbfcd {
namespace {

constexpr const char* kModule = "raster-io";

std::string describe(const std::filesystem::path& path) { return "'" + path.string() + "'"; }

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error(kModule, "cannot open " + describe(path));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

/// Runs `writer` against a temp file next to `path`, then renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::function<void(const std::filesystem::path&)>& writer) {
  auto tmp = path;
  tmp += ".tmp";
  try {
    writer(tmp);
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
}

// ---------------------------------------------------------------- PGM

struct PgmTokenizer {
  const std::vector<unsigned char>& bytes;
  std::size_t pos = 2;

  std::string next() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    std::string token;
    while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') token.push_back(static_cast<char>(bytes[pos++]));
    return token;
  }

  long next_int(const std::filesystem::path& path) {
    auto token = next();
    try {
      std::size_t used = 0;
      long v = std::stol(token, &used);
      if (used != token.size() || v < 0) throw std::invalid_argument(token);
      return v;
    } catch (const std::exception&) {
      throw io_error(kModule, "malformed PGM header in " + describe(path));
    }
  }
};

RasterImage read_pgm(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  const bool ascii = bytes[1] == '2';
  PgmTokenizer tok{bytes};
  const long width = tok.next_int(path);
  const long height = tok.next_int(path);
  const long maxval = tok.next_int(path);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) throw io_error(kModule, "invalid PGM header in " + describe(path));
  RasterImage out(width, height);
  const Index n = out.size();
  if (ascii) {
    for (Index p = 0; p < n; ++p) {
      const long v = tok.next_int(path);
      if (v > maxval) throw io_error(kModule, "PGM sample exceeds maxval in " + describe(path));
      out.data[p] = static_cast<double>(v);
    }
    return out;
  }
  std::size_t pos = tok.pos + 1;  // exactly one whitespace byte after maxval
  const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
  if (bytes.size() < pos + static_cast<std::size_t>(n) * sample_bytes) throw io_error(kModule, "truncated PGM data in " + describe(path));
  for (Index p = 0; p < n; ++p) {
    unsigned v = bytes[pos];
    if (sample_bytes == 2) v = (v << 8) | bytes[pos + 1];
    pos += sample_bytes;
    out.data[p] = static_cast<double>(v);
  }
  return out;
}

// ---------------------------------------------------------------- PNG

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* buffer = static_cast<std::string*>(png_get_error_ptr(png));
  if (buffer) *buffer = msg;
  png_longjmp(png, 1);
}
void png_warning_handler(png_structp, png_const_charp) {}

struct PngPixels {
  Index width = 0;
  Index height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<unsigned char> rows;  // packed, big-endian for 16-bit
};

bool decode_png(std::FILE* fp, PngPixels& px, std::string& err) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler, png_warning_handler);
  if (!png) {
    err = "out of memory";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> row_ptrs;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) {
    err = "palette PNGs are not supported";
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  if (png_get_bit_depth(png, info) < 8) png_set_packing(png);
  png_read_update_info(png, info);
  px.width = png_get_image_width(png, info);
  px.height = png_get_image_height(png, info);
  px.channels = png_get_channels(png, info);
  px.bit_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  px.rows.resize(stride * static_cast<std::size_t>(px.height));
  row_ptrs.resize(px.height);
  for (Index r = 0; r < px.height; ++r) row_ptrs[r] = px.rows.data() + r * stride;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

int select_band(int bands, const std::optional<int>& band, const std::filesystem::path& path) {
  if (band) {
    if (*band < 0 || *band >= bands)
      throw config_error(kModule, "band " + std::to_string(*band) + " out of range for " + describe(path) + " with " + std::to_string(bands) + " band(s)");
    return *band;
  }
  if (bands != 1) throw config_error(kModule, describe(path) + " has " + std::to_string(bands) + " bands; select one explicitly");
  return 0;
}

RasterImage read_png(const std::filesystem::path& path, const LoadOptions& options) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw io_error(kModule, "cannot open " + describe(path));
  PngPixels px;
  std::string err;
  if (!decode_png(fp.get(), px, err)) throw io_error(kModule, "cannot decode PNG " + describe(path) + ": " + err);
  const int band = select_band(px.channels, options.band, path);
  RasterImage out(px.width, px.height);
  const std::size_t bytes_per_sample = px.bit_depth == 16 ? 2 : 1;
  const std::size_t stride = static_cast<std::size_t>(px.width) * px.channels * bytes_per_sample;
  for (Index r = 0; r < px.height; ++r) {
    const unsigned char* row = px.rows.data() + r * stride;
    for (Index c = 0; c < px.width; ++c) {
      const unsigned char* s = row + (c * px.channels + band) * bytes_per_sample;
      const unsigned v = bytes_per_sample == 2 ? (unsigned(s[0]) << 8) | s[1] : s[0];
      out(r, c) = static_cast<double>(v);
    }
  }
  return out;
}

void encode_png(const std::filesystem::path& path, Index width, Index height, int color_type, int bit_depth,
                const std::vector<unsigned char>& packed) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw io_error(kModule, "cannot create " + describe(path));
  std::string err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler, png_warning_handler);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  std::vector<png_bytep> rows(height);
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t stride = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  volatile bool ok = png && info;
  if (ok) {
    if (setjmp(png_jmpbuf(png))) {
      ok = false;
    } else {
      png_init_io(png, fp.get());
      png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                   PNG_FILTER_TYPE_DEFAULT);
      png_write_info(png, info);
      for (Index r = 0; r < height; ++r) rows[r] = const_cast<unsigned char*>(packed.data() + r * stride);
      png_write_image(png, rows.data());
      png_write_end(png, nullptr);
    }
  }
  png_destroy_write_struct(png ? &png : nullptr, info ? &info : nullptr);
  if (!ok) throw io_error(kModule, "cannot encode PNG " + describe(path) + (err.empty() ? "" : ": " + err));
  if (std::fflush(fp.get()) != 0) throw io_error(kModule, "write failed for " + describe(path));
}

// ---------------------------------------------------------------- TIFF

struct TiffCloser {
  void operator()(TIFF* t) const {
    if (t) TIFFClose(t);
  }
};
using TiffPtr = std::unique_ptr<TIFF, TiffCloser>;

void silence_libtiff() {
  static const bool done = [] {
    TIFFSetWarningHandler(nullptr);
    TIFFSetErrorHandler(nullptr);
    return true;
  }();
  (void)done;
}

double tiff_sample(const unsigned char* p, int bits, int format) {
  switch (bits) {
    case 8:
      return static_cast<double>(*p);
    case 16: {
      std::uint16_t v;
      std::memcpy(&v, p, 2);
      return static_cast<double>(v);
    }
    case 32: {
      if (format == SAMPLEFORMAT_IEEEFP) {
        float v;
        std::memcpy(&v, p, 4);
        return static_cast<double>(v);
      }
      break;
    }
    default:
      break;
  }
  return 0.0;
}

RasterImage read_tiff(const std::filesystem::path& path, const LoadOptions& options) {
  silence_libtiff();
  TiffPtr tif(TIFFOpen(path.c_str(), "r"));
  if (!tif) throw io_error(kModule, "cannot open TIFF " + describe(path));
  std::uint32_t width = 0, height = 0;
  std::uint16_t spp = 1, bits = 8, format = SAMPLEFORMAT_UINT, planar = PLANARCONFIG_CONTIG;
  TIFFGetField(tif.get(), TIFFTAG_IMAGEWIDTH, &width);
  TIFFGetField(tif.get(), TIFFTAG_IMAGELENGTH, &height);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLESPERPIXEL, &spp);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_BITSPERSAMPLE, &bits);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLEFORMAT, &format);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_PLANARCONFIG, &planar);
  const bool supported = (format == SAMPLEFORMAT_UINT && (bits == 8 || bits == 16)) || (format == SAMPLEFORMAT_IEEEFP && bits == 32);
  if (!supported)
    throw io_error(kModule, "unsupported TIFF sample format in " + describe(path) + " (" + std::to_string(bits) + "-bit, format " +
                                std::to_string(format) + "); expected uint8, uint16 or float32");
  if (width == 0 || height == 0) throw io_error(kModule, "empty TIFF " + describe(path));
  const int band = select_band(spp, options.band, path);
  const std::size_t bps = bits / 8;
  RasterImage out(width, height);

  if (TIFFIsTiled(tif.get())) {
    std::uint32_t tw = 0, th = 0;
    TIFFGetField(tif.get(), TIFFTAG_TILEWIDTH, &tw);
    TIFFGetField(tif.get(), TIFFTAG_TILELENGTH, &th);
    std::vector<unsigned char> tile(TIFFTileSize(tif.get()));
    const std::uint16_t plane = planar == PLANARCONFIG_SEPARATE ? band : 0;
    const std::size_t step = planar == PLANARCONFIG_SEPARATE ? 1 : spp;
    const std::size_t offset = planar == PLANARCONFIG_SEPARATE ? 0 : band;
    for (std::uint32_t y0 = 0; y0 < height; y0 += th) {
      for (std::uint32_t x0 = 0; x0 < width; x0 += tw) {
        if (TIFFReadTile(tif.get(), tile.data(), x0, y0, 0, plane) < 0) throw io_error(kModule, "cannot read TIFF tile in " + describe(path));
        for (std::uint32_t y = y0; y < std::min(height, y0 + th); ++y)
          for (std::uint32_t x = x0; x < std::min(width, x0 + tw); ++x)
            out(y, x) = tiff_sample(tile.data() + (((y - y0) * tw + (x - x0)) * step + offset) * bps, bits, format);
      }
    }
  } else {
    std::vector<unsigned char> line(TIFFScanlineSize(tif.get()));
    for (std::uint32_t y = 0; y < height; ++y) {
      if (planar == PLANARCONFIG_SEPARATE) {
        if (TIFFReadScanline(tif.get(), line.data(), y, band) < 0) throw io_error(kModule, "cannot read TIFF row in " + describe(path));
        for (std::uint32_t x = 0; x < width; ++x) out(y, x) = tiff_sample(line.data() + x * bps, bits, format);
      } else {
        if (TIFFReadScanline(tif.get(), line.data(), y, 0) < 0) throw io_error(kModule, "cannot read TIFF row in " + describe(path));
        for (std::uint32_t x = 0; x < width; ++x) out(y, x) = tiff_sample(line.data() + (x * spp + band) * bps, bits, format);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- GBFR raw

constexpr char kRawMagic[4] = {'G', 'B', 'F', 'R'};

std::uint32_t read_le32(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}
void put_le32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

RasterImage read_raw(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  if (bytes.size() < 16) throw io_error(kModule, "truncated GBFR header in " + describe(path));
  const std::uint32_t width = read_le32(bytes.data() + 4);
  const std::uint32_t height = read_le32(bytes.data() + 8);
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (bytes.size() != 16 + 8 * n) throw io_error(kModule, "GBFR payload size mismatch in " + describe(path));
  RasterImage out(width, height);
  for (std::size_t p = 0; p < n; ++p) {
    std::uint64_t bitsv = 0;
    for (int i = 7; i >= 0; --i) bitsv = (bitsv << 8) | bytes[16 + 8 * p + i];
    double v;
    std::memcpy(&v, &bitsv, 8);
    out.data[static_cast<Index>(p)] = v;
  }
  return out;
}

std::string encode_raw(Index width, Index height, const double* values) {
  std::string out(kRawMagic, 4);
  put_le32(out, static_cast<std::uint32_t>(width));
  put_le32(out, static_cast<std::uint32_t>(height));
  put_le32(out, 0);
  out.reserve(16 + 8 * static_cast<std::size_t>(width * height));
  for (Index p = 0; p < width * height; ++p) {
    std::uint64_t bitsv;
    std::memcpy(&bitsv, values + p, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bitsv >> (8 * i)) & 0xff));
  }
  return out;
}

void require_integral(const RasterImage& image, double maxval, const std::filesystem::path& path) {
  for (Index p = 0; p < image.size(); ++p) {
    const double v = image.data[p];
    if (!(v >= 0.0 && v <= maxval && std::floor(v) == v))
      throw config_error(kModule, "value " + std::to_string(v) + " not representable as integer in [0," + std::to_string(int(maxval)) + "] for " + describe(path));
  }
}

}  // namespace

RasterImage load_raster(const std::filesystem::path& path, const LoadOptions& options) {
  if (!std::filesystem::exists(path)) throw io_error(kModule, "file not found: " + describe(path));
  RasterImage image;
  {
    std::vector<unsigned char> head;
    {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw io_error(kModule, "cannot open " + describe(path));
      head.resize(8);
      in.read(reinterpret_cast<char*>(head.data()), 8);
      head.resize(static_cast<std::size_t>(in.gcount()));
    }
    static constexpr unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    auto starts = [&](const unsigned char* sig, std::size_t n) { return head.size() >= n && std::memcmp(head.data(), sig, n) == 0; };
    if (starts(png_sig, 8)) {
      image = read_png(path, options);
    } else if (head.size() >= 2 && head[0] == 'P' && (head[1] == '2' || head[1] == '5')) {
      if (options.band && *options.band != 0) throw config_error(kModule, "PGM files have a single band");
      image = read_pgm(read_file(path), path);
    } else if (head.size() >= 4 && ((head[0] == 'I' && head[1] == 'I' && head[2] == 42 && head[3] == 0) ||
                                    (head[0] == 'M' && head[1] == 'M' && head[2] == 0 && head[3] == 42))) {
      image = read_tiff(path, options);
    } else if (starts(reinterpret_cast<const unsigned char*>(kRawMagic), 4)) {
      if (options.band && *options.band != 0) throw config_error(kModule, "GBFR files have a single band");
      image = read_raw(read_file(path), path);
    } else {
      throw io_error(kModule, "unsupported format: " + describe(path));
    }
  }
  if (!image.data.allFinite()) throw io_error(kModule, "non-finite values (NaN/Inf) in " + describe(path));
  if (options.normalize) image = minmax_scaled(image);
  return image;
}

ChangeMask mask_from_raster(const RasterImage& raster, double changed_value) {
  std::set<double> values(raster.data.begin(), raster.data.end());
  if (values.size() > 2 || (values.size() == 2 && !values.count(changed_value))) {
    std::ostringstream msg;
    msg << "mask must contain only the changed value " << changed_value << " and one background value; found {";
    bool first = true;
    for (double v : values) {
      msg << (first ? "" : ", ") << v;
      first = false;
    }
    msg << "}";
    throw config_error(kModule, msg.str());
  }
  ChangeMask mask(raster.width, raster.height);
  mask.changed = raster.data.array() == changed_value;
  return mask;
}

ChangeMask load_mask(const std::filesystem::path& path, double changed_value) {
  return mask_from_raster(load_raster(path), changed_value);
}

RgbImage render_error_map(const ChangeMask& pred, const ChangeMask& ref) {
  if (!same_shape(pred, ref)) throw config_error(kModule, "error map: prediction and reference dimensions differ");
  RgbImage out{pred.width, pred.height, std::vector<Rgb>(static_cast<std::size_t>(pred.size()))};
  for (Index p = 0; p < pred.size(); ++p) {
    const bool r = ref.changed[p];
    const bool q = pred.changed[p];
    out.pixels[p] = r ? (q ? colors::correct_change : colors::missed_alarm) : (q ? colors::false_alarm : colors::background);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const RasterImage& image, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw config_error(kModule, "PNG bit depth must be 8 or 16");
  require_integral(image, bit_depth == 8 ? 255.0 : 65535.0, path);
  std::vector<unsigned char> packed;
  packed.reserve(static_cast<std::size_t>(image.size()) * (bit_depth / 8));
  for (Index p = 0; p < image.size(); ++p) {
    const auto v = static_cast<unsigned>(image.data[p]);
    if (bit_depth == 16) packed.push_back(static_cast<unsigned char>(v >> 8));
    packed.push_back(static_cast<unsigned char>(v & 0xff));
  }
  atomic_write(path, [&](const auto& tmp) { encode_png(tmp, image.width, image.height, PNG_COLOR_TYPE_GRAY, bit_depth, packed); });
}

void write_mask_png(const std::filesystem::path& path, const ChangeMask& mask) {
  std::vector<unsigned char> packed(static_cast<std::size_t>(mask.size()));
  for (Index p = 0; p < mask.size(); ++p) packed[p] = mask.changed[p] ? 255 : 0;
  atomic_write(path, [&](const auto& tmp) { encode_png(tmp, mask.width, mask.height, PNG_COLOR_TYPE_GRAY, 8, packed); });
}

void write_rgb_png(const std::filesystem::path& path, const RgbImage& image) {
  std::vector<unsigned char> packed;
  packed.reserve(image.pixels.size() * 3);
  for (const auto& px : image.pixels) packed.insert(packed.end(), px.begin(), px.end());
  atomic_write(path, [&](const auto& tmp) { encode_png(tmp, image.width, image.height, PNG_COLOR_TYPE_RGB, 8, packed); });
}

void write_pgm(const std::filesystem::path& path, const RasterImage& image, int maxval) {
  if (maxval < 1 || maxval > 65535) throw config_error(kModule, "PGM maxval must be in [1,65535]");
  require_integral(image, maxval, path);
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n" + std::to_string(maxval) + "\n";
  for (Index p = 0; p < image.size(); ++p) {
    const auto v = static_cast<unsigned>(image.data[p]);
    if (maxval > 255) out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xff));
  }
  write_text_atomic(path, out);
}

void write_tiff(const std::filesystem::path& path, const RasterImage& image, TiffSample sample) {
  silence_libtiff();
  if (sample == TiffSample::uint8) require_integral(image, 255.0, path);
  if (sample == TiffSample::uint16) require_integral(image, 65535.0, path);
  atomic_write(path, [&](const std::filesystem::path& tmp) {
    TiffPtr tif(TIFFOpen(tmp.c_str(), "w"));
    if (!tif) throw io_error(kModule, "cannot create " + describe(tmp));
    const std::uint16_t bits = sample == TiffSample::uint8 ? 8 : sample == TiffSample::uint16 ? 16 : 32;
    TIFFSetField(tif.get(), TIFFTAG_IMAGEWIDTH, static_cast<std::uint32_t>(image.width));
    TIFFSetField(tif.get(), TIFFTAG_IMAGELENGTH, static_cast<std::uint32_t>(image.height));
    TIFFSetField(tif.get(), TIFFTAG_SAMPLESPERPIXEL, 1);
    TIFFSetField(tif.get(), TIFFTAG_BITSPERSAMPLE, bits);
    TIFFSetField(tif.get(), TIFFTAG_SAMPLEFORMAT, sample == TiffSample::float32 ? SAMPLEFORMAT_IEEEFP : SAMPLEFORMAT_UINT);
    TIFFSetField(tif.get(), TIFFTAG_PHOTOMETRIC, PHOTOMETRIC_MINISBLACK);
    TIFFSetField(tif.get(), TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
    TIFFSetField(tif.get(), TIFFTAG_ROWSPERSTRIP, 1);
    std::vector<unsigned char> line(static_cast<std::size_t>(image.width) * (bits / 8));
    for (Index r = 0; r < image.height; ++r) {
      for (Index c = 0; c < image.width; ++c) {
        const double v = image(r, c);
        unsigned char* dst = line.data() + c * (bits / 8);
        if (bits == 8) {
          *dst = static_cast<unsigned char>(v);
        } else if (bits == 16) {
          const auto u = static_cast<std::uint16_t>(v);
          std::memcpy(dst, &u, 2);
        } else {
          const auto f = static_cast<float>(v);
          std::memcpy(dst, &f, 4);
        }
      }
      if (TIFFWriteScanline(tif.get(), line.data(), static_cast<std::uint32_t>(r), 0) < 0) throw io_error(kModule, "TIFF write failed for " + describe(tmp));
    }
  });
}

void write_raw(const std::filesystem::path& path, const RasterImage& image) {
  write_text_atomic(path, encode_raw(image.width, image.height, image.data.data()));
}

void write_raw(const std::filesystem::path& path, const MatrixX<double>& matrix) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = matrix;
  write_text_atomic(path, encode_raw(matrix.cols(), matrix.rows(), rows.data()));
}

void write_text_atomic(const std::filesystem::path& path, const std::string& contents) {
  atomic_write(path, [&](const std::filesystem::path& tmp) {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error(kModule, "cannot create " + describe(tmp));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw io_error(kModule, "write failed for " + describe(tmp));
  });
}

}  // namespace gbfcd
