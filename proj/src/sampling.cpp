#include "gbfcd/sampling.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace gbfcd {
namespace {

constexpr const char* kModule = "graph-core";

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  for (auto& s : s_) s = splitmix64(seed);
}

std::uint64_t Xoshiro256::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::uint64_t Xoshiro256::bounded(std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = next();
    if (x >= threshold) return x % bound;
  }
}

double Xoshiro256::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Xoshiro256::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t run_seed, Stream stream) {
  std::uint64_t state = run_seed ^ static_cast<std::uint64_t>(stream);
  return splitmix64(state);
}

SamplerKind parse_sampler(const std::string& name) {
  if (name == "uniform-random" || name == "uniform") return SamplerKind::uniform_random;
  if (name == "grid") return SamplerKind::grid;
  throw config_error(kModule, "unknown sampler '" + name + "' (expected uniform-random or grid)");
}

std::string to_string(SamplerKind kind) { return kind == SamplerKind::grid ? "grid" : "uniform-random"; }

std::vector<Index> SampleSet::graph_to_pixel() const {
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n_total));
  order.insert(order.end(), sample_indices.begin(), sample_indices.end());
  order.insert(order.end(), complement_indices.begin(), complement_indices.end());
  return order;
}

std::vector<Index> SampleSet::pixel_to_graph() const {
  std::vector<Index> inverse(static_cast<std::size_t>(n_total));
  for (Index g = 0; g < n_total; ++g) inverse[pixel_of(g)] = g;
  return inverse;
}

SampleSet SampleSet::from_samples(Index n_total, std::vector<Index> samples, std::uint64_t seed) {
  if (samples.empty()) throw config_error(kModule, "sample set must contain at least one pixel");
  if (static_cast<Index>(samples.size()) > n_total) throw config_error(kModule, "more samples than pixels");
  std::vector<char> taken(static_cast<std::size_t>(n_total), 0);
  for (Index p : samples) {
    if (p < 0 || p >= n_total) throw config_error(kModule, "sample index " + std::to_string(p) + " out of range");
    if (taken[p]) throw config_error(kModule, "duplicate sample index " + std::to_string(p));
    taken[p] = 1;
  }
  SampleSet s;
  s.n_total = n_total;
  s.seed = seed;
  s.sample_indices = std::move(samples);
  s.complement_indices.reserve(static_cast<std::size_t>(n_total) - s.sample_indices.size());
  for (Index p = 0; p < n_total; ++p)
    if (!taken[p]) s.complement_indices.push_back(p);
  return s;
}

SampleSet sample_pixels(Index n_total, Index n_s, std::uint64_t seed, SamplerKind strategy) {
  if (n_s < 1) throw config_error(kModule, "n_s must be at least 1");
  if (n_s > n_total) throw config_error(kModule, "n_s (" + std::to_string(n_s) + ") exceeds pixel count (" + std::to_string(n_total) + ")");
  std::vector<Index> samples(static_cast<std::size_t>(n_s));
  if (strategy == SamplerKind::grid) {
    // Cell centres of n_s equal slices of [0, N).
    for (Index k = 0; k < n_s; ++k) samples[k] = static_cast<Index>((2 * k + 1) * n_total / (2 * n_s));
    return SampleSet::from_samples(n_total, std::move(samples), seed);
  }
  // Partial Fisher-Yates over the pixel indices.
  std::vector<Index> pool(static_cast<std::size_t>(n_total));
  std::iota(pool.begin(), pool.end(), Index{0});
  Xoshiro256 rng(seed);
  for (Index i = 0; i < n_s; ++i) {
    const auto j = i + static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(n_total - i)));
    std::swap(pool[i], pool[j]);
    samples[i] = pool[i];
  }
  return SampleSet::from_samples(n_total, std::move(samples), seed);
}

}  // namespace gbfcd
