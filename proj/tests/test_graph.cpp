#include <gtest/gtest.h>

#include <cmath>

#include "gbfcd/graph.hpp"
#include "gbfcd/spectral.hpp"
#include "test_support.hpp"

using namespace gbfcd;

namespace {

/// Dense |x_i - x_j| in graph order.
MatrixX<double> dense_distances_graph_order(const RasterImage& img, const SampleSet& s) {
  const auto order = s.graph_to_pixel();
  const Index n = img.size();
  MatrixX<double> d(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) d(i, j) = std::abs(img.data[order[i]] - img.data[order[j]]);
  return d;
}

}  // namespace

TEST(Distances, TwoSamples) {
  const auto img = gbfcd::test::image_from(3, 1, {0.1, 0.3, 0.5});
  const auto s = SampleSet::from_samples(3, {0, 1});
  const auto d = pairwise_distances(img, s, 3);
  EXPECT_EQ(d.aa(0, 0), 0.0);
  EXPECT_NEAR(d.aa(0, 1), 0.2, 1e-15);
  EXPECT_NEAR(d.aa(1, 0), 0.2, 1e-15);
  EXPECT_NEAR(d.ab(0, 1), 0.008, 1e-15);
  EXPECT_NEAR(d.ab(0, 0), 0.064, 1e-15);
  EXPECT_NEAR(pairwise_distances(img, s, 1).ab(0, 1), 0.2, 1e-15);
  EXPECT_THROW(pairwise_distances(img, s, 2), Error);
}

TEST(Distances, ConstantImage) {
  RasterImage img(4, 4);
  img.data.setConstant(0.7);
  const auto s = sample_pixels(16, 5, 1);
  const auto d = pairwise_distances(img, s);
  EXPECT_TRUE((d.aa.array() == 0).all());
  EXPECT_TRUE((d.ab.array() == 0).all());
  const auto deg = approximate_degree(d);
  EXPECT_EQ(deg.clamped, 16);
  EXPECT_TRUE((deg.values.array() == degree_floor<double>()).all());
}

TEST(Degree, FullSamplingIsExactRowSum) {
  const auto img = gbfcd::test::random_image(5, 5, 4);
  const auto s = sample_pixels(25, 25, 2);
  const auto d = pairwise_distances(img, s);
  const auto deg = approximate_degree(d);
  const VectorX<double> exact = d.aa.rowwise().sum();
  for (Index i = 0; i < 25; ++i) EXPECT_NEAR(deg.values[i], exact[i], 1e-14 * exact[i]);
}

TEST(Degree, ExactWhenSamplesCoverAllValues) {
  // Five intensities, every one represented among the samples: the distance matrix has
  // repeated rows and the Nyström row sums are exact.
  Xoshiro256 rng(3);
  const double levels[] = {0.0, 0.15, 0.4, 0.75, 1.0};
  RasterImage img(16, 16);
  for (Index p = 0; p < img.size(); ++p) img.data[p] = levels[rng.bounded(5)];
  std::vector<Index> pick;
  for (double v : levels)
    for (Index p = 0; p < img.size(); ++p)
      if (img.data[p] == v) {
        pick.push_back(p);
        break;
      }
  pick.push_back(pick.back() + 1 == img.size() ? 0 : 200);
  const auto s = SampleSet::from_samples(img.size(), pick);
  const auto deg = approximate_degree(pairwise_distances(img, s, 1));
  const VectorX<double> exact = dense_distances_graph_order(img, s).rowwise().sum();
  EXPECT_EQ(deg.clamped, 0);
  for (Index i = 0; i < exact.size(); ++i) EXPECT_NEAR(deg.values[i], exact[i], 1e-8 * exact[i]) << i;
}

TEST(Normalize, IdentityAndArithmetic) {
  DistanceBlocks<double> d;
  d.aa = (MatrixX<double>(2, 2) << 0, 0.2, 0.2, 0).finished();
  d.ab = (MatrixX<double>(1, 2) << 0.3, 0.1).finished();
  auto same = normalize_blocks(d, VectorX<double>(VectorX<double>::Ones(3)));
  EXPECT_EQ(same.aa, d.aa);
  EXPECT_EQ(same.ab, d.ab);
  auto quarter = normalize_blocks(d, VectorX<double>(VectorX<double>::Constant(3, 4.0)));
  EXPECT_DOUBLE_EQ(quarter.aa(0, 1), 0.05);
  EXPECT_DOUBLE_EQ(quarter.ab(0, 0), 0.075);
  EXPECT_THROW(normalize_blocks(d, VectorX<double>(VectorX<double>::Ones(2))), Error);
}

TEST(Normalize, KeepsSymmetry) {
  const auto img = gbfcd::test::random_image(10, 10, 8);
  const auto s = sample_pixels(100, 12, 8);
  auto d = pairwise_distances(img, s);
  const auto deg = approximate_degree(d);
  const auto n = normalize_blocks(d, deg.values);
  EXPECT_EQ(n.aa, n.aa.transpose());
}

TEST(Kernel, ClosedForms) {
  EXPECT_EQ(gaussian(0.0, 0.3), 1.0);
  EXPECT_NEAR(gaussian(0.3 * std::sqrt(2.0), 0.3), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(gaussian(0.3 * std::sqrt(2.0), 0.3), 0.36788, 1e-5);
  double prev = 2.0;
  for (double v = 0; v < 2; v += 0.01) {
    const double k = gaussian(v, 0.5);
    EXPECT_LT(k, prev);
    prev = k;
  }
  DistanceBlocks<double> d;
  d.aa = MatrixX<double>::Zero(1, 1);
  d.ab = MatrixX<double>::Zero(0, 1);
  EXPECT_THROW(gaussian_kernel(d, 0.0), Error);
  EXPECT_THROW(gaussian_kernel(d, -1.0), Error);
}

TEST(TemporalGraph, ConstantImageIsAllOnes) {
  RasterImage img(6, 6);
  img.data.setConstant(0.25);
  const auto g = build_temporal_graph(img, sample_pixels(36, 7, 1), 1e-3);
  EXPECT_TRUE((g.aa.array() == 1.0).all());
  EXPECT_TRUE((g.ab.array() == 1.0).all());
}

TEST(TemporalGraph, Reproducible) {
  const auto img = gbfcd::test::image_from(4, 2, {0, 1, 1, 0, 0, 0, 1, 1});
  const auto s = SampleSet::from_samples(8, {0, 1, 5});
  const auto a = build_temporal_graph(img, s, 0.1);
  const auto b = build_temporal_graph(img, s, 0.1);
  EXPECT_EQ(a.aa, b.aa);
  EXPECT_EQ(a.ab, b.ab);
}

TEST(TemporalGraph, FullSamplingMatchesDense) {
  const auto img = gbfcd::test::random_image(8, 8, 21);
  const auto s = sample_pixels(64, 64, 5);
  const auto g = build_temporal_graph(img, s, 5e-3, {3});
  const auto dense = detail::dense_epoch_graph(img, 5e-3);
  for (Index i = 0; i < 64; ++i)
    for (Index j = 0; j < 64; ++j) EXPECT_NEAR(g.aa(i, j), dense(s.sample_indices[i], s.sample_indices[j]), 1e-10);
}

TEST(TemporalGraph, PartialSamplingMatchesDenseSlices) {
  // With covering samples and power 1 the approximate degrees are exact, so both blocks
  // are slices of the dense epoch graph.
  const auto pre = gbfcd::test::image_from(4, 2, {0.0, 0.5, 1.0, 0.5, 0.0, 1.0, 1.0, 0.0});
  const auto s = SampleSet::from_samples(8, {0, 1, 2});
  const auto g = build_temporal_graph(pre, s, 0.05, {1});
  const auto dense = detail::dense_epoch_graph(pre, 0.05);
  const auto order = s.graph_to_pixel();
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) EXPECT_NEAR(g.aa(i, j), dense(order[i], order[j]), 1e-12);
  for (Index r = 0; r < 5; ++r)
    for (Index j = 0; j < 3; ++j) EXPECT_NEAR(g.ab(r, j), dense(order[3 + r], order[j]), 1e-12);
}
