#include "gbfcd/metrics.hpp"

#include <cstdio>

namespace gbfcd {
namespace {

std::optional<double> ratio(double num, double den, double scale = 1.0) {
  if (den == 0.0) return std::nullopt;
  return scale * num / den;
}

std::string fmt(const std::optional<double>& v) {
  if (!v) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

}  // namespace

ConfusionCounts confusion(const ChangeMask& pred, const ChangeMask& ref) {
  if (!same_shape(pred, ref)) throw config_error("metrics", "prediction and reference dimensions differ");
  ConfusionCounts c;
  for (Index p = 0; p < ref.size(); ++p) {
    const bool r = ref.changed[p];
    const bool q = pred.changed[p];
    if (r && q) ++c.tp;
    else if (!r && q) ++c.fp;
    else if (r && !q) ++c.fn;
    else ++c.tn;
  }
  return c;
}

MetricsReport report(const ConfusionCounts& c) {
  if (c.total() <= 0) throw config_error("metrics", "cannot score an empty mask");
  const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
  const double n = tp + fp + fn + tn;
  MetricsReport r;
  r.ma_pct = ratio(fn, tp + fn, 100.0);
  r.fa_pct = ratio(fp, fp + tn, 100.0);
  r.precision = ratio(tp, tp + fp);
  r.recall = ratio(tp, tp + fn);
  r.oe_pct = 100.0 * (fp + fn) / n;
  const double po = (tp + tn) / n;
  const double pe = ((tp + fp) * (tp + fn) + (fn + tn) * (fp + tn)) / (n * n);
  r.kappa = ratio(po - pe, 1.0 - pe);
  return r;
}

std::string metrics_csv_header() { return "method,ma_pct,fa_pct,precision,recall,kappa,oe_pct"; }

std::string metrics_csv_row(const std::string& method, const MetricsReport& r) {
  return method + "," + fmt(r.ma_pct) + "," + fmt(r.fa_pct) + "," + fmt(r.precision) + "," + fmt(r.recall) + "," + fmt(r.kappa) + "," +
         fmt(r.oe_pct);
}

}  // namespace gbfcd
