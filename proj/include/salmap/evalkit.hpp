#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "salmap/imgcore/raster.hpp"

namespace salmap {

struct MetricsReport {
  double dsc = 0.0;
  double jsi = 0.0;
  double acc = 0.0;
  double sens = 0.0;
  double spec = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Pixel-wise overlap metrics. A ratio with a zero denominator is 1 when the
/// class it measures is absent from both masks, else 0.
MetricsReport mask_metrics(const BinaryMask& pred, const BinaryMask& gt);

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr), from (0,0) to (1,1)
  double auc = 0.0;
};

/// Sweeps every distinct saliency value as a ">= t" threshold; trapezoidal AUC.
/// Throws when gt holds a single class.
RocCurve roc_auc(const Plane& saliency, const BinaryMask& gt);

struct EvalCase {
  std::string id;
  BinaryMask pred;
  BinaryMask gt;
};

struct BatchReport {
  std::vector<std::pair<std::string, MetricsReport>> rows;
  MetricsReport mean;  // macro average; counts are summed
};

BatchReport batch_evaluate(const std::vector<EvalCase>& cases, int jobs = 1);

/// Header `id,dsc,jsi,acc,sens,spec`, one row per image, then a `mean` row.
void write_metrics_csv(std::ostream& os, const BatchReport& report);

}  // namespace salmap
