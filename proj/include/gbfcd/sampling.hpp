#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gbfcd/raster.hpp"

namespace gbfcd {

/// xoshiro256** seeded through splitmix64. Output is identical on every platform.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t bounded(std::uint64_t bound);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller (no cached second value).
  double normal();

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Independent substreams derived from one run seed.
enum class Stream : std::uint64_t {
  sampling = 0x5a4d'504c'0000'0001ULL,
  synthetic_pre = 0x5359'4e50'0000'0002ULL,
  synthetic_post = 0x5359'4e50'0000'0003ULL,
};

/// Seed of a substream: splitmix64 applied to run_seed XOR the stream tag.
std::uint64_t derive_seed(std::uint64_t run_seed, Stream stream);

enum class SamplerKind { uniform_random, grid };

SamplerKind parse_sampler(const std::string& name);
std::string to_string(SamplerKind kind);

/// Nyström sample split. Graph position g < n_s is pixel sample_indices[g];
/// g >= n_s is pixel complement_indices[g - n_s].
struct SampleSet {
  Index n_total = 0;
  std::vector<Index> sample_indices;
  std::vector<Index> complement_indices;
  std::uint64_t seed = 0;

  Index n_s() const { return static_cast<Index>(sample_indices.size()); }
  Index complement_size() const { return static_cast<Index>(complement_indices.size()); }

  Index pixel_of(Index graph_position) const {
    return graph_position < n_s() ? sample_indices[graph_position] : complement_indices[graph_position - n_s()];
  }
  /// Pixel index for every graph position.
  std::vector<Index> graph_to_pixel() const;
  /// Graph position for every pixel index.
  std::vector<Index> pixel_to_graph() const;

  /// Builds a SampleSet from explicit, distinct sample pixels (order kept).
  static SampleSet from_samples(Index n_total, std::vector<Index> samples, std::uint64_t seed = 0);
};

SampleSet sample_pixels(Index n_total, Index n_s, std::uint64_t seed, SamplerKind strategy = SamplerKind::uniform_random);

}  // namespace gbfcd
