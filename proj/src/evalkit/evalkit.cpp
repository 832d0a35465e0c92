#include "salmap/evalkit.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "salmap/imgcore/parallel.hpp"

namespace salmap {

namespace {

double ratio(std::size_t num, std::size_t den, bool class_absent) {
  if (den == 0) return class_absent ? 1.0 : 0.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricsReport mask_metrics(const BinaryMask& pred, const BinaryMask& gt) {
  if (!pred.same_shape(gt)) throw Error("prediction and ground truth differ in size");
  if (gt.size() == 0) throw Error("cannot evaluate an empty image");
  MetricsReport m;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const bool p = pred[i] != 0, g = gt[i] != 0;
    if (p && g)
      ++m.tp;
    else if (p)
      ++m.fp;
    else if (g)
      ++m.fn;
    else
      ++m.tn;
  }
  const bool no_fg = m.tp + m.fp + m.fn == 0;
  const bool no_bg = m.tn + m.fp + m.fn == 0;
  m.dsc = ratio(2 * m.tp, 2 * m.tp + m.fp + m.fn, no_fg);
  m.jsi = ratio(m.tp, m.tp + m.fp + m.fn, no_fg);
  m.acc = ratio(m.tp + m.tn, gt.size(), false);
  m.sens = ratio(m.tp, m.tp + m.fn, no_fg);
  m.spec = ratio(m.tn, m.tn + m.fp, no_bg);
  return m;
}

RocCurve roc_auc(const Plane& saliency, const BinaryMask& gt) {
  if (!saliency.same_shape(gt)) throw Error("saliency and ground truth differ in size");
  const std::size_t pos = gt.count(), neg = gt.size() - pos;
  if (pos == 0 || neg == 0) throw Error("ROC needs both classes in the ground truth");
  std::vector<std::size_t> order(gt.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return saliency[a] > saliency[b]; });
  RocCurve c;
  c.points.emplace_back(0.0, 0.0);
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double t = saliency[order[i]];
    for (; i < order.size() && saliency[order[i]] == t; ++i) (gt[order[i]] ? tp : fp)++;
    c.points.emplace_back(static_cast<double>(fp) / static_cast<double>(neg),
                          static_cast<double>(tp) / static_cast<double>(pos));
  }
  // the last threshold already admits every pixel, matching the -inf sentinel
  for (std::size_t k = 1; k < c.points.size(); ++k) {
    const auto [x0, y0] = c.points[k - 1];
    const auto [x1, y1] = c.points[k];
    c.auc += (x1 - x0) * (y0 + y1) * 0.5;
  }
  return c;
}

BatchReport batch_evaluate(const std::vector<EvalCase>& cases, int jobs) {
  if (cases.empty()) throw Error("nothing to evaluate");
  BatchReport r;
  r.rows.resize(cases.size());
  parallel_for(cases.size(), jobs, [&](std::size_t i) {
    r.rows[i] = {cases[i].id, mask_metrics(cases[i].pred, cases[i].gt)};
  });
  MetricsReport& m = r.mean;
  for (const auto& [id, x] : r.rows) {
    m.dsc += x.dsc;
    m.jsi += x.jsi;
    m.acc += x.acc;
    m.sens += x.sens;
    m.spec += x.spec;
    m.tp += x.tp;
    m.fp += x.fp;
    m.tn += x.tn;
    m.fn += x.fn;
  }
  const auto n = static_cast<double>(r.rows.size());
  m.dsc /= n;
  m.jsi /= n;
  m.acc /= n;
  m.sens /= n;
  m.spec /= n;
  return r;
}

void write_metrics_csv(std::ostream& os, const BatchReport& report) {
  const auto old = os.precision(6);
  const auto flags = os.flags();
  os.setf(std::ios::fixed, std::ios::floatfield);
  auto row = [&](const std::string& id, const MetricsReport& m) {
    os << id << ',' << m.dsc << ',' << m.jsi << ',' << m.acc << ',' << m.sens << ',' << m.spec << '\n';
  };
  os << "id,dsc,jsi,acc,sens,spec\n";
  for (const auto& [id, m] : report.rows) row(id, m);
  row("mean", report.mean);
  os.precision(old);
  os.flags(flags);
}

}  // namespace salmap
