#pragma once

// Per-epoch Nyström graph: sampled distances, approximate degrees,
// degree normalization of the distances, then a Gaussian kernel.
// Only the n_s x n_s sample block and the c x n_s complement block are stored.

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

#include "gbfcd/detail/parallel.hpp"
#include "gbfcd/raster.hpp"
#include "gbfcd/sampling.hpp"

namespace gbfcd {

template <typename Scalar>
struct DistanceBlocks {
  MatrixX<Scalar> aa;  ///< n_s x n_s, sample-sample
  MatrixX<Scalar> ab;  ///< c x n_s, complement-sample

  Index n_s() const { return aa.rows(); }
  Index complement_size() const { return ab.rows(); }
};

/// Ŵ = [aa; ab], shape (n_s + c) x n_s, in graph order.
template <typename Scalar>
struct AffinityBlocks {
  MatrixX<Scalar> aa;
  MatrixX<Scalar> ab;
  /// Degrees clamped to the floor while building this graph (summed over fused inputs).
  Index clamped_degrees = 0;

  Index n_s() const { return aa.rows(); }
  Index complement_size() const { return ab.rows(); }
  Index n_total() const { return aa.rows() + ab.rows(); }
};

template <typename Scalar>
struct ApproximateDegree {
  VectorX<Scalar> values;  ///< length n_s + c, graph order
  Index clamped = 0;
};

struct GraphOptions {
  /// Exponent applied to complement-sample distances (1 or 3).
  int ab_power = 3;
};

/// Smallest admissible degree.
template <typename Scalar>
constexpr Scalar degree_floor() {
  return std::max(static_cast<Scalar>(1e-300), std::numeric_limits<Scalar>::min());
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix; eigenvalues with
/// |mu| <= rel_tol * max|mu| are treated as zero.
template <typename Scalar>
MatrixX<Scalar> symmetric_pinv(const MatrixX<Scalar>& m, Scalar rel_tol = Scalar(1e-12)) {
  const Index n = m.rows();
  if (n == 0) return MatrixX<Scalar>(0, 0);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(m);
  const VectorX<Scalar>& mu = eig.eigenvalues();
  const Scalar tol = rel_tol * mu.cwiseAbs().maxCoeff();
  VectorX<Scalar> inv(n);
  for (Index i = 0; i < n; ++i) inv[i] = std::abs(mu[i]) > tol && mu[i] != Scalar(0) ? Scalar(1) / mu[i] : Scalar(0);
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

template <typename Scalar>
DistanceBlocks<Scalar> pairwise_distances(const Raster<Scalar>& image, const SampleSet& samples, int ab_power = 3) {
  if (samples.n_total != image.size()) throw config_error("graph-core", "sample set does not match image pixel count");
  if (ab_power != 1 && ab_power != 3) throw config_error("graph-core", "ab_power must be 1 or 3");
  const Index ns = samples.n_s();
  const Index c = samples.complement_size();
  VectorX<Scalar> xs(ns);
  for (Index j = 0; j < ns; ++j) xs[j] = image.data[samples.sample_indices[j]];

  DistanceBlocks<Scalar> d;
  d.aa.resize(ns, ns);
  for (Index j = 0; j < ns; ++j)
    for (Index i = 0; i < ns; ++i) d.aa(i, j) = std::abs(xs[i] - xs[j]);

  d.ab.resize(c, ns);
  detail::parallel_rows(c, [&](Index begin, Index end) {
    for (Index j = 0; j < ns; ++j) {
      for (Index r = begin; r < end; ++r) {
        const Scalar dist = std::abs(image.data[samples.complement_indices[r]] - xs[j]);
        d.ab(r, j) = ab_power == 3 ? dist * dist * dist : dist;
      }
    }
  });
  return d;
}

/// Nyström row-sum approximation:
///   sample rows:     aa row sums + ab column sums
///   complement rows: ab row sums + ab * pinv(aa) * (ab column sums)
template <typename Scalar>
ApproximateDegree<Scalar> approximate_degree(const DistanceBlocks<Scalar>& d) {
  const Index ns = d.n_s();
  const Index c = d.complement_size();
  const VectorX<Scalar> ab_colsum = d.ab.colwise().sum().transpose();

  ApproximateDegree<Scalar> deg;
  deg.values.resize(ns + c);
  deg.values.head(ns) = d.aa.rowwise().sum() + ab_colsum;
  if (c > 0) {
    const VectorX<Scalar> projected = symmetric_pinv(d.aa) * ab_colsum;
    deg.values.tail(c) = d.ab.rowwise().sum() + d.ab * projected;
  }
  const Scalar floor = degree_floor<Scalar>();
  for (Index i = 0; i < deg.values.size(); ++i) {
    if (!(deg.values[i] >= floor)) {
      deg.values[i] = floor;
      ++deg.clamped;
    }
  }
  return deg;
}

/// aa'(i,j) = aa(i,j) / sqrt(deg_i deg_j); ab'(r,j) = ab(r,j) / sqrt(deg_{n_s+r} deg_j).
template <typename Scalar>
DistanceBlocks<Scalar> normalize_blocks(DistanceBlocks<Scalar> d, const VectorX<Scalar>& degree) {
  const Index ns = d.n_s();
  const Index c = d.complement_size();
  if (degree.size() != ns + c) throw config_error("graph-core", "degree vector length does not match graph size");
  if (!(degree.array() > Scalar(0)).all()) throw numerical_error("graph-core", "non-positive degree in normalization");
  // Scaling by 1/sqrt(deg) per factor avoids underflow of deg_i * deg_j at the floor.
  const VectorX<Scalar> inv_sqrt = degree.array().sqrt().inverse().matrix();
  const auto sample_scale = inv_sqrt.head(ns);
  for (Index j = 0; j < ns; ++j)
    for (Index i = 0; i < ns; ++i) d.aa(i, j) *= sample_scale[i] * sample_scale[j];
  detail::parallel_rows(c, [&](Index begin, Index end) {
    auto rows = d.ab.middleRows(begin, end - begin);
    rows = inv_sqrt.segment(ns + begin, end - begin).asDiagonal() * rows * sample_scale.asDiagonal();
  });
  return d;
}

template <typename Scalar>
Scalar gaussian(Scalar v, Scalar sigma) {
  return std::exp(-(v * v) / (Scalar(2) * sigma * sigma));
}

/// Entrywise exp(-v^2 / (2 sigma^2)). Subnormal results are flushed to zero.
template <typename Scalar>
AffinityBlocks<Scalar> gaussian_kernel(const DistanceBlocks<Scalar>& d, Scalar sigma) {
  if (!(sigma > Scalar(0)) || !std::isfinite(sigma)) throw config_error("graph-core", "sigma must be positive and finite");
  const Scalar scale = Scalar(-1) / (Scalar(2) * sigma * sigma);
  const Scalar tiny = std::numeric_limits<Scalar>::min();
  auto kernel = [&](const auto& v) {
    const auto k = (v.array().square() * scale).exp();
    return (k < tiny).select(Scalar(0), k).matrix();
  };
  AffinityBlocks<Scalar> g;
  g.aa = kernel(d.aa);
  g.ab.resize(d.ab.rows(), d.ab.cols());
  detail::parallel_rows(d.ab.rows(), [&](Index begin, Index end) { g.ab.middleRows(begin, end - begin) = kernel(d.ab.middleRows(begin, end - begin)); });
  return g;
}

/// One epoch: kernel(normalize(distances, approximate_degree(distances)), sigma).
/// Both epochs must share the same SampleSet for fusion.
template <typename Scalar>
AffinityBlocks<Scalar> build_temporal_graph(const Raster<Scalar>& image, const SampleSet& samples, Scalar sigma,
                                            const GraphOptions& options = {}) {
  auto distances = pairwise_distances(image, samples, options.ab_power);
  const auto degree = approximate_degree(distances);
  auto graph = gaussian_kernel(normalize_blocks(std::move(distances), degree.values), sigma);
  graph.clamped_degrees = degree.clamped;
  return graph;
}

}  // namespace gbfcd
