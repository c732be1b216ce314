#include "gbfcd/selection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace gbfcd {
namespace {

constexpr const char* kModule = "selection";
constexpr int kThresholdBins = 256;

void require_unit_range(const RasterImage& image, const char* what) {
  for (Index p = 0; p < image.size(); ++p) {
    const double v = image.data[p];
    if (!(v >= 0.0 && v <= 1.0)) throw config_error(kModule, std::string(what) + " must lie in [0,1]");
  }
}

struct RangeHistogram {
  std::array<double, kThresholdBins> counts{};
  std::vector<int> bin_of;
  double lo = 0.0;
  double hi = 0.0;
};

/// 256-bin histogram over [min, max]; bin index is relative position times 256.
RangeHistogram range_histogram(const RasterImage& image) {
  if (image.size() == 0) throw config_error(kModule, "empty image");
  RangeHistogram h;
  h.lo = image.data.minCoeff();
  h.hi = image.data.maxCoeff();
  if (!(h.hi > h.lo)) throw numerical_error(kModule, "no separable classes: image is constant");
  h.bin_of.resize(static_cast<std::size_t>(image.size()));
  const double span = h.hi - h.lo;
  for (Index p = 0; p < image.size(); ++p) {
    const int b = std::min(kThresholdBins - 1, static_cast<int>((image.data[p] - h.lo) / span * kThresholdBins));
    h.bin_of[p] = b;
    h.counts[b] += 1.0;
  }
  return h;
}

double bin_center(int b) { return (b + 0.5) / kThresholdBins; }

Threshold make_threshold(const RangeHistogram& h, int cut) {
  return {cut, h.lo + cut * (h.hi - h.lo) / kThresholdBins};
}

ChangeMask upper_class_of(const RasterImage& image, const RangeHistogram& h, int cut) {
  ChangeMask mask(image.width, image.height);
  for (Index p = 0; p < image.size(); ++p) mask.changed[p] = h.bin_of[p] >= cut;
  return mask;
}

}  // namespace

DiffMode parse_diff_mode(const std::string& name) {
  if (name == "abs") return DiffMode::abs;
  if (name == "signed") return DiffMode::signed_diff;
  throw config_error(kModule, "unknown diff mode '" + name + "' (expected abs or signed)");
}

MiOn parse_mi_on(const std::string& name) {
  if (name == "raw") return MiOn::raw;
  if (name == "thresholded") return MiOn::thresholded;
  throw config_error(kModule, "unknown mi_on mode '" + name + "' (expected raw or thresholded)");
}

std::string to_string(DiffMode mode) { return mode == DiffMode::abs ? "abs" : "signed"; }
std::string to_string(MiOn mode) { return mode == MiOn::raw ? "raw" : "thresholded"; }

RasterImage difference_image(const RasterImage& pre, const RasterImage& post, DiffMode mode) {
  if (!same_shape(pre, post)) throw config_error(kModule, "difference image: dimensions differ");
  RasterImage d(pre.width, pre.height);
  d.data = post.data - pre.data;
  if (mode == DiffMode::abs) d.data = d.data.cwiseAbs();
  return minmax_scaled(d);
}

int histogram_bin(double value, int bins) { return std::min(bins - 1, static_cast<int>(value * bins)); }

double histogram_entropy(const RasterImage& image, int bins) {
  if (bins < 2) throw config_error(kModule, "bins must be at least 2");
  if (image.size() == 0) throw config_error(kModule, "empty image");
  require_unit_range(image, "entropy input");
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  for (Index p = 0; p < image.size(); ++p) counts[histogram_bin(image.data[p], bins)] += 1.0;
  const double n = static_cast<double>(image.size());
  double h = 0.0;
  for (double c : counts)
    if (c > 0) h += (c / n) * std::log((c * n) / (c * c));
  return h;
}

double mutual_information(const RasterImage& a, const RasterImage& b, int bins) {
  if (bins < 2) throw config_error(kModule, "bins must be at least 2");
  if (!same_shape(a, b)) throw config_error(kModule, "mutual information: dimensions differ");
  if (a.size() == 0) throw config_error(kModule, "mutual information of an empty image");
  require_unit_range(a, "mutual information input");
  require_unit_range(b, "mutual information input");
  const auto nb = static_cast<std::size_t>(bins);
  std::vector<double> joint(nb * nb, 0.0), pa(nb, 0.0), pb(nb, 0.0);
  for (Index p = 0; p < a.size(); ++p) {
    const int x = histogram_bin(a.data[p], bins);
    const int y = histogram_bin(b.data[p], bins);
    joint[x * nb + y] += 1.0;
    pa[x] += 1.0;
    pb[y] += 1.0;
  }
  const double n = static_cast<double>(a.size());
  double mi = 0.0;
  for (std::size_t x = 0; x < nb; ++x) {
    for (std::size_t y = 0; y < nb; ++y) {
      const double c = joint[x * nb + y];
      if (c > 0) mi += (c / n) * std::log((c * n) / (pa[x] * pb[y]));
    }
  }
  return std::max(0.0, mi);
}

MICurve select_eigenvector(const EigenSystem<double>& e, const RasterImage& diff, const SampleSet& samples, const SelectionOptions& options) {
  if (e.retained() == 0) throw numerical_error(kModule, "no retained eigenvectors to select from");
  if (samples.n_total != diff.size()) throw config_error(kModule, "difference image does not match the sample set");
  if (!(diff.data.maxCoeff() > diff.data.minCoeff()))
    throw numerical_error(kModule, "degenerate difference image: pre and post are identical up to scaling, no change evidence");
  MICurve curve;
  curve.mi_nats.resize(static_cast<std::size_t>(e.retained()));
  // Each entry is independent; order of evaluation does not affect the curve.
  detail::parallel_rows(
      e.retained(),
      [&](Index begin, Index end) {
        for (Index i = begin; i < end; ++i) {
          const RasterImage img = eigen_image(e, i, samples, diff.width, diff.height);
          double mi = 0.0;
          if (options.mi_on == MiOn::raw) {
            mi = mutual_information(img, diff, options.bins);
          } else if (img.data.maxCoeff() > img.data.minCoeff()) {
            const ChangeMask m = threshold_map(img, diff);
            RasterImage binary(img.width, img.height);
            binary.data = m.changed.cast<double>().matrix();
            mi = mutual_information(binary, diff, options.bins);
          }
          curve.mi_nats[i] = mi;
        }
      },
      1);
  for (std::size_t i = 1; i < curve.mi_nats.size(); ++i)
    if (curve.mi_nats[i] > curve.mi_nats[curve.selected]) curve.selected = static_cast<Index>(i);
  return curve;
}

Threshold otsu_threshold(const RasterImage& image) {
  const auto h = range_histogram(image);
  const double n = static_cast<double>(image.size());
  double total_mean = 0.0;
  for (int b = 0; b < kThresholdBins; ++b) total_mean += h.counts[b] * bin_center(b);
  total_mean /= n;
  int best_cut = 0;
  double best = -1.0;
  double w0 = 0.0, sum0 = 0.0;
  for (int cut = 1; cut < kThresholdBins; ++cut) {
    w0 += h.counts[cut - 1];
    sum0 += h.counts[cut - 1] * bin_center(cut - 1);
    const double w1 = n - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (total_mean * n - sum0) / w1;
    const double between = (w0 / n) * (w1 / n) * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_cut = cut;
    }
  }
  if (best_cut == 0) throw numerical_error(kModule, "no separable classes");
  return make_threshold(h, best_cut);
}

Threshold ki_threshold_value(const RasterImage& image) {
  const auto h = range_histogram(image);
  const double n = static_cast<double>(image.size());
  int best_cut = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int cut = 1; cut < kThresholdBins; ++cut) {
    double w[2] = {0, 0}, s[2] = {0, 0}, ss[2] = {0, 0};
    for (int b = 0; b < kThresholdBins; ++b) {
      const int k = b >= cut;
      const double x = bin_center(b);
      w[k] += h.counts[b];
      s[k] += h.counts[b] * x;
      ss[k] += h.counts[b] * x * x;
    }
    if (w[0] == 0 || w[1] == 0) continue;
    double j = 1.0;
    bool valid = true;
    for (int k = 0; k < 2; ++k) {
      const double mean = s[k] / w[k];
      const double var = ss[k] / w[k] - mean * mean;
      if (!(var > 1e-18)) {
        valid = false;
        break;
      }
      const double p = w[k] / n;
      j += 2.0 * p * std::log(std::sqrt(var)) - 2.0 * p * std::log(p);
    }
    if (valid && j < best) {
      best = j;
      best_cut = cut;
    }
  }
  if (best_cut == 0) throw numerical_error(kModule, "Kittler-Illingworth: degenerate single-class histogram");
  return make_threshold(h, best_cut);
}

ChangeMask upper_class(const RasterImage& image, const Threshold& t) {
  return upper_class_of(image, range_histogram(image), t.cut);
}

ChangeMask threshold_map(const RasterImage& eigen_img, const RasterImage& diff) {
  if (!same_shape(eigen_img, diff)) throw config_error(kModule, "threshold map: dimensions differ");
  const auto h = range_histogram(eigen_img);
  const Threshold t = otsu_threshold(eigen_img);
  ChangeMask upper = upper_class_of(eigen_img, h, t.cut);
  double sum_up = 0, sum_low = 0;
  Index n_up = 0;
  for (Index p = 0; p < diff.size(); ++p) {
    if (upper.changed[p]) {
      sum_up += diff.data[p];
      ++n_up;
    } else {
      sum_low += diff.data[p];
    }
  }
  const double mean_up = sum_up / static_cast<double>(n_up);
  const double mean_low = sum_low / static_cast<double>(diff.size() - n_up);
  // Ties keep the upper class as changed.
  if (mean_low > mean_up) upper.changed = !upper.changed;
  return upper;
}

ChangeMask ki_threshold(const RasterImage& diff) {
  const auto h = range_histogram(diff);
  return upper_class_of(diff, h, ki_threshold_value(diff).cut);
}

}  // namespace gbfcd
