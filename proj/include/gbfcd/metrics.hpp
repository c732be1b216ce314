#pragma once

#include <optional>
#include <string>

#include "gbfcd/raster.hpp"

namespace gbfcd {

struct ConfusionCounts {
  Index tp = 0;
  Index fp = 0;
  Index fn = 0;
  Index tn = 0;

  Index total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Percent fields are in [0,100]. An empty optional marks a metric whose
/// denominator is zero (e.g. MA for a reference without changed pixels).
struct MetricsReport {
  std::optional<double> ma_pct;
  std::optional<double> fa_pct;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> kappa;
  std::optional<double> oe_pct;
};

/// Changed is the positive class.
ConfusionCounts confusion(const ChangeMask& pred, const ChangeMask& ref);

MetricsReport report(const ConfusionCounts& c);

/// Header matching csv_row: method,ma_pct,fa_pct,precision,recall,kappa,oe_pct
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& method, const MetricsReport& r);

}  // namespace gbfcd
