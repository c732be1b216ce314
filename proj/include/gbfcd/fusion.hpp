#pragma once

#include <span>
#include <string>

#include "gbfcd/graph.hpp"

namespace gbfcd {

enum class FusionOp { min };

inline FusionOp parse_fusion(const std::string& name) {
  if (name == "min") return FusionOp::min;
  throw config_error("fusion", "unknown fusion operator '" + name + "' (only min is available)");
}

/// Elementwise minimum of two graphs built on the same SampleSet.
template <typename Scalar>
AffinityBlocks<Scalar> fuse(const AffinityBlocks<Scalar>& g1, const AffinityBlocks<Scalar>& g2) {
  if (g1.aa.rows() != g2.aa.rows() || g1.aa.cols() != g2.aa.cols() || g1.ab.rows() != g2.ab.rows() || g1.ab.cols() != g2.ab.cols())
    throw config_error("fusion", "graph shapes differ; both epochs must use the same sample set");
  AffinityBlocks<Scalar> out;
  out.aa = g1.aa.cwiseMin(g2.aa);
  out.ab.resize(g1.ab.rows(), g1.ab.cols());
  detail::parallel_rows(g1.ab.rows(), [&](Index begin, Index end) {
    out.ab.middleRows(begin, end - begin) = g1.ab.middleRows(begin, end - begin).cwiseMin(g2.ab.middleRows(begin, end - begin));
  });
  out.clamped_degrees = g1.clamped_degrees + g2.clamped_degrees;
  return out;
}

/// Left fold of the pairwise minimum over any number of epochs (at least one).
template <typename Scalar>
AffinityBlocks<Scalar> fuse(std::span<const AffinityBlocks<Scalar>> graphs, FusionOp op = FusionOp::min) {
  (void)op;
  if (graphs.empty()) throw config_error("fusion", "no graphs to fuse");
  AffinityBlocks<Scalar> out = graphs.front();
  for (std::size_t k = 1; k < graphs.size(); ++k) out = fuse(out, graphs[k]);
  return out;
}

}  // namespace gbfcd
