#pragma once

// Orthogonalized Nyström eigendecomposition of a (fused) affinity graph and
// a dense reference used as an oracle on small scenes.

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <string>
#include <vector>

#include "gbfcd/graph.hpp"

namespace gbfcd {

/// How a sample block that is not positive definite is handled.
///  signature: A = V |Λ| J V^T is kept with its signs; the extension is exact for any symmetric A.
///  jitter:    A + εI with ε = max(0, -λ_min) + 1e-10 tr(A)/n_s, then the PSD formula; ε is subtracted afterwards.
enum class IndefiniteHandling { signature, jitter };

inline IndefiniteHandling parse_indefinite(const std::string& name) {
  if (name == "signature") return IndefiniteHandling::signature;
  if (name == "jitter") return IndefiniteHandling::jitter;
  throw config_error("spectral", "unknown indefinite handling '" + name + "' (expected signature or jitter)");
}

inline std::string to_string(IndefiniteHandling h) { return h == IndefiniteHandling::signature ? "signature" : "jitter"; }

struct NystromOptions {
  IndefiniteHandling indefinite = IndefiniteHandling::signature;
};

template <typename Scalar>
struct EigenSystem {
  /// Û: N x k approximate eigenvectors in graph order, orthonormal columns.
  MatrixX<Scalar> vectors;
  /// Approximate graph eigenvalues, descending.
  VectorX<Scalar> values;
  IndefiniteHandling indefinite = IndefiniteHandling::signature;
  /// Diagonal shift added to the sample block (jitter mode only, 0 when positive definite).
  Scalar jitter = Scalar(0);
  /// Negative eigenvalues of the sample block that were kept (signature mode).
  Index negative_modes = 0;
  /// Sample-block modes below the pseudo-inverse cutoff plus columns discarded as rank deficient.
  Index dropped = 0;
  Index n_s = 0;
  Index complement = 0;

  Index retained() const { return vectors.cols(); }
};

namespace detail {

/// Flips each column so that its largest-magnitude entry (first on ties) is positive.
template <typename Scalar>
void orient_columns(MatrixX<Scalar>& columns) {
  for (Index j = 0; j < columns.cols(); ++j) {
    Index arg = 0;
    columns.col(j).cwiseAbs().maxCoeff(&arg);
    if (columns(arg, j) < Scalar(0)) columns.col(j) = -columns.col(j);
  }
}

template <typename Scalar>
constexpr Scalar pinv_rel_tol() {
  return Scalar(1e-12);
}

/// Symmetrized sample block, its eigendecomposition and (jitter mode) the shift.
template <typename Scalar>
struct SampleBlockEigen {
  Scalar jitter = Scalar(0);
  VectorX<Scalar> mu;    ///< eigenvalues of A (+ εI), ascending
  MatrixX<Scalar> v;
  std::vector<Index> kept;  ///< indices with |mu| above the cutoff (and mu > 0 in jitter mode)
};

template <typename Scalar>
SampleBlockEigen<Scalar> sample_block_eigen(const MatrixX<Scalar>& aa, IndefiniteHandling mode) {
  const Index ns = aa.rows();
  const MatrixX<Scalar> a = (aa + aa.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(a);
  SampleBlockEigen<Scalar> out;
  out.mu = eig.eigenvalues();
  out.v = eig.eigenvectors();
  if (mode == IndefiniteHandling::jitter && !(out.mu[0] > Scalar(0))) {
    out.jitter = std::max(Scalar(0), -out.mu[0]) + Scalar(1e-10) * a.trace() / Scalar(ns);
    out.mu.array() += out.jitter;
  }
  const Scalar tol = pinv_rel_tol<Scalar>() * out.mu.cwiseAbs().maxCoeff();
  for (Index i = 0; i < ns; ++i) {
    const bool keep = std::abs(out.mu[i]) > tol && (mode == IndefiniteHandling::signature || out.mu[i] > Scalar(0));
    if (keep) out.kept.push_back(i);
  }
  return out;
}

}  // namespace detail

/// S = A + A^{-1/2} B B^T A^{-1/2} with A the jittered sample block and B = ab^T.
/// For positive definite A its eigenvalues are the reported graph eigenvalues.
template <typename Scalar>
MatrixX<Scalar> nystrom_s_matrix(const AffinityBlocks<Scalar>& g) {
  const auto se = detail::sample_block_eigen(g.aa, IndefiniteHandling::jitter);
  VectorX<Scalar> inv_sqrt = VectorX<Scalar>::Zero(g.n_s());
  for (Index i : se.kept) inv_sqrt[i] = Scalar(1) / std::sqrt(se.mu[i]);
  VectorX<Scalar> mu_kept = VectorX<Scalar>::Zero(g.n_s());
  for (Index i : se.kept) mu_kept[i] = se.mu[i];
  const MatrixX<Scalar> inv_root = se.v * inv_sqrt.asDiagonal() * se.v.transpose();
  const MatrixX<Scalar> a = se.v * mu_kept.asDiagonal() * se.v.transpose();
  return a + inv_root * (g.ab.transpose() * g.ab) * inv_root;
}

/// One-shot orthogonal Nyström extension of the graph [A B; B^T C] from its sample columns.
///
/// With A = V Λ V^T and G = [A; B^T] V |Λ|^{-1/2}, the extension is Ŵ = G J G^T, J = sign(Λ).
/// A thin QR G = Q R turns this into Ŵ = Q (R J R^T) Q^T, so Û = Q U and the values are the
/// eigenvalues of the k x k core. For positive definite A this is
///   Û = [A; B^T] A^{-1/2} U_s Λ_s^{-1/2},  S = A + A^{-1/2} B B^T A^{-1/2} = U_s Λ_s U_s^T.
/// Jitter mode shifts A to positive definite first and subtracts the shift from the values.
template <typename Scalar>
EigenSystem<Scalar> orthogonal_nystrom(const AffinityBlocks<Scalar>& g, const NystromOptions& options = {}) {
  const Index ns = g.n_s();
  const Index c = g.complement_size();
  if (ns < 1) throw config_error("spectral", "graph has no samples");
  if (g.ab.cols() != ns && c > 0) throw config_error("spectral", "complement block width does not match sample count");
  const bool all_zero = (g.aa.array() == Scalar(0)).all() && (g.ab.array() == Scalar(0)).all();
  if (all_zero) throw numerical_error("spectral", "degenerate graph: all affinities are zero");

  const auto se = detail::sample_block_eigen(g.aa, options.indefinite);
  const Index k = static_cast<Index>(se.kept.size());
  if (k == 0) throw numerical_error("spectral", "degenerate graph: sample block has no eigenvalue above the cutoff");

  MatrixX<Scalar> vk(ns, k);
  VectorX<Scalar> sign(k), root(k), inv_root(k);
  for (Index j = 0; j < k; ++j) {
    const Scalar mu = se.mu[se.kept[j]];
    vk.col(j) = se.v.col(se.kept[j]);
    sign[j] = mu < Scalar(0) ? Scalar(-1) : Scalar(1);
    root[j] = std::sqrt(std::abs(mu));
    inv_root[j] = Scalar(1) / root[j];
  }

  // G: sample rows A V |Λ|^{-1/2} = V sign |Λ|^{1/2}, complement rows ab V |Λ|^{-1/2}.
  MatrixX<Scalar> gm(ns + c, k);
  gm.topRows(ns) = vk * (sign.array() * root.array()).matrix().asDiagonal();
  const MatrixX<Scalar> right = vk * inv_root.asDiagonal();
  detail::parallel_rows(c, [&](Index begin, Index end) {
    gm.middleRows(ns + begin, end - begin).noalias() = g.ab.middleRows(begin, end - begin) * right;
  });

  Eigen::HouseholderQR<Eigen::Ref<MatrixX<Scalar>>> qr(gm);
  const MatrixX<Scalar> r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  const MatrixX<Scalar> core = r * sign.asDiagonal() * r.transpose();
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig((core + core.transpose()) / Scalar(2));
  const VectorX<Scalar> lambda = eig.eigenvalues().reverse();
  const MatrixX<Scalar> u = eig.eigenvectors().rowwise().reverse();

  const Scalar cutoff = Scalar(1e-14) * lambda.cwiseAbs().maxCoeff();
  std::vector<Index> cols;
  for (Index j = 0; j < k; ++j)
    if (std::abs(lambda[j]) > cutoff) cols.push_back(j);
  if (cols.empty()) throw numerical_error("spectral", "degenerate graph: no eigenvalue above the rank cutoff");

  EigenSystem<Scalar> e;
  e.indefinite = options.indefinite;
  e.n_s = ns;
  e.complement = c;
  e.jitter = se.jitter;
  e.negative_modes = (sign.array() < Scalar(0)).count();
  e.dropped = ns - static_cast<Index>(cols.size());
  const Index kr = static_cast<Index>(cols.size());
  e.values.resize(kr);
  e.vectors = MatrixX<Scalar>::Zero(ns + c, kr);
  for (Index j = 0; j < kr; ++j) {
    e.values[j] = lambda[cols[j]] - se.jitter;
    e.vectors.col(j).head(k) = u.col(cols[j]);
  }
  e.vectors = qr.householderQ() * e.vectors;
  detail::orient_columns(e.vectors);
  return e;
}

/// Rows of a graph-ordered matrix rearranged into pixel order.
template <typename Scalar>
MatrixX<Scalar> to_pixel_order(const MatrixX<Scalar>& graph_rows, const SampleSet& samples) {
  MatrixX<Scalar> out(graph_rows.rows(), graph_rows.cols());
  for (Index g = 0; g < graph_rows.rows(); ++g) out.row(samples.pixel_of(g)) = graph_rows.row(g);
  return out;
}

/// Column `index` of Û scattered to raster order and min-max scaled to [0,1]
/// (a constant column gives 0.5 everywhere).
template <typename Scalar>
Raster<Scalar> eigen_image(const EigenSystem<Scalar>& e, Index index, const SampleSet& samples, Index width, Index height) {
  if (index < 0 || index >= e.retained())
    throw config_error("spectral", "eigenvector index " + std::to_string(index) + " out of range (" + std::to_string(e.retained()) + " retained)");
  if (samples.n_total != width * height || e.vectors.rows() != samples.n_total)
    throw config_error("spectral", "sample set does not match eigen-image dimensions");
  Raster<Scalar> image(width, height);
  for (Index g = 0; g < samples.n_total; ++g) image.data[samples.pixel_of(g)] = e.vectors(g, index);
  return minmax_scaled(image, Scalar(0.5));
}

template <typename Scalar>
struct DenseReference {
  MatrixX<Scalar> fused;    ///< N x N fused affinity, pixel order
  VectorX<Scalar> values;   ///< descending
  MatrixX<Scalar> vectors;  ///< pixel order, sign-normalized columns
};

inline constexpr Index kDenseReferenceMaxPixels = 4096;

namespace detail {

template <typename Scalar>
MatrixX<Scalar> dense_epoch_graph(const Raster<Scalar>& image, Scalar sigma) {
  const Index n = image.size();
  MatrixX<Scalar> d(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) d(i, j) = std::abs(image.data[i] - image.data[j]);
  VectorX<Scalar> deg = d.rowwise().sum();
  for (Index i = 0; i < n; ++i) deg[i] = std::max(deg[i], degree_floor<Scalar>());
  const VectorX<Scalar> s = deg.array().sqrt().inverse().matrix();
  const Scalar scale = Scalar(-1) / (Scalar(2) * sigma * sigma);
  return ((s.asDiagonal() * d * s.asDiagonal()).array().square() * scale).exp().matrix();
}

}  // namespace detail

/// Materializes both full N x N epoch graphs (distance power 1, exact degrees),
/// fuses them by elementwise minimum and diagonalizes the result exactly.
template <typename Scalar>
DenseReference<Scalar> dense_reference_pipeline(const Raster<Scalar>& pre, const Raster<Scalar>& post, Scalar sigma_pre, Scalar sigma_post) {
  if (!same_shape(pre, post)) throw config_error("spectral", "dense reference: image dimensions differ");
  if (pre.size() > kDenseReferenceMaxPixels)
    throw config_error("spectral", "dense reference limited to " + std::to_string(kDenseReferenceMaxPixels) + " pixels");
  if (!(sigma_pre > Scalar(0)) || !(sigma_post > Scalar(0))) throw config_error("spectral", "sigma must be positive");
  DenseReference<Scalar> ref;
  ref.fused = detail::dense_epoch_graph(pre, sigma_pre).cwiseMin(detail::dense_epoch_graph(post, sigma_post));
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(ref.fused);
  ref.values = eig.eigenvalues().reverse();
  ref.vectors = eig.eigenvectors().rowwise().reverse();
  detail::orient_columns(ref.vectors);
  return ref;
}

}  // namespace gbfcd
