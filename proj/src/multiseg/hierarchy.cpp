#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <set>
#include <tuple>

#include "salmap/imgcore/color.hpp"
#include "salmap/multiseg.hpp"

namespace salmap {

std::vector<int> merge_targets(int finest_count, const MultisegConfig& cfg) {
  if (cfg.level_count < 1) throw Error("level_count must be at least 1");
  const auto want = static_cast<std::size_t>(cfg.level_count - 1);
  if (!cfg.merge_schedule.empty()) {
    if (cfg.merge_schedule.size() != want) throw Error("merge_schedule length must be level_count - 1");
    for (std::size_t i = 0; i < want; ++i) {
      if (cfg.merge_schedule[i] < 1) throw Error("merge_schedule entries must be positive");
      if (i > 0 && cfg.merge_schedule[i] >= cfg.merge_schedule[i - 1])
        throw Error("merge_schedule must be strictly decreasing");
    }
    return cfg.merge_schedule;
  }
  std::vector<int> t;
  if (want == 0) return t;
  const double n0 = std::max(finest_count, 1);
  const double end = std::max(std::min<double>(cfg.coarsest_regions, n0), 1.0);
  int prev = finest_count;
  for (std::size_t l = 1; l <= want; ++l) {
    const double frac = static_cast<double>(l) / static_cast<double>(want);
    int v = static_cast<int>(std::lround(n0 * std::pow(end / n0, frac)));
    v = std::max(1, std::min(v, prev - 1));
    t.push_back(v);
    prev = v;
  }
  return t;
}

namespace {

struct Candidate {
  double dist;
  int a, b;  // a < b
  std::uint32_t va, vb;
  bool operator>(const Candidate& o) const {
    return std::tie(dist, a, b) > std::tie(o.dist, o.a, o.b);
  }
};

LabelMap snapshot(const LabelMap& finest, const std::vector<int>& rep) {
  LabelGrid g(finest.width(), finest.height());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = rep[static_cast<std::size_t>(finest.labels[i])];
  return compact_labels(g);
}

}  // namespace

MultiLevelPartition build_hierarchy(const LabelMap& finest, const RasterImage& img,
                                    const MultisegConfig& cfg) {
  if (img.width() != finest.width() || img.height() != finest.height())
    throw Error("label map and image differ in shape");
  if (img.channels() != 3) throw Error("hierarchy needs a 3-channel image");
  const auto targets = merge_targets(finest.region_count, cfg);
  const auto n = static_cast<std::size_t>(finest.region_count);

  const RasterImage lab = convert_color(img, ColorSpace::Lab);
  std::vector<std::array<double, 3>> sum(n, {0, 0, 0});
  std::vector<double> count(n, 0.0);
  for (std::size_t i = 0; i < finest.labels.size(); ++i) {
    const auto r = static_cast<std::size_t>(finest.labels[i]);
    count[r] += 1.0;
    for (int c = 0; c < 3; ++c) sum[r][static_cast<std::size_t>(c)] += lab.channel_span(c)[i];
  }
  std::vector<std::set<int>> nbrs(n);
  {
    const auto adj = region_adjacency(finest);
    for (std::size_t r = 0; r < n; ++r) nbrs[r].insert(adj[r].begin(), adj[r].end());
  }
  std::vector<std::uint32_t> version(n, 0);
  std::vector<bool> alive(n, true);
  std::vector<int> parent(n);  // union-find over finest ids; roots are min ids
  for (std::size_t r = 0; r < n; ++r) parent[r] = static_cast<int>(r);
  auto root = [&](int r) {
    while (parent[static_cast<std::size_t>(r)] != r) r = parent[static_cast<std::size_t>(r)];
    return r;
  };
  auto distance = [&](int a, int b) {
    double d = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      const double diff = sum[static_cast<std::size_t>(a)][c] / count[static_cast<std::size_t>(a)] -
                          sum[static_cast<std::size_t>(b)][c] / count[static_cast<std::size_t>(b)];
      d += diff * diff;
    }
    return std::sqrt(d);
  };

  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> pq;
  auto push = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    pq.push({distance(a, b), a, b, version[static_cast<std::size_t>(a)], version[static_cast<std::size_t>(b)]});
  };
  for (std::size_t r = 0; r < n; ++r)
    for (int q : nbrs[r])
      if (q > static_cast<int>(r)) push(static_cast<int>(r), q);

  MultiLevelPartition out;
  out.levels.push_back(finest);
  out.parents.emplace_back();
  out.duplicated.push_back(false);

  int live = finest.region_count;
  for (int target : targets) {
    while (live > target && !pq.empty()) {
      const Candidate c = pq.top();
      pq.pop();
      const auto ua = static_cast<std::size_t>(c.a), ub = static_cast<std::size_t>(c.b);
      if (!alive[ua] || !alive[ub] || version[ua] != c.va || version[ub] != c.vb) continue;
      // merge b into a (a is the smaller id)
      alive[ub] = false;
      parent[ub] = c.a;
      count[ua] += count[ub];
      for (std::size_t k = 0; k < 3; ++k) sum[ua][k] += sum[ub][k];
      for (int q : nbrs[ub]) {
        auto& qn = nbrs[static_cast<std::size_t>(q)];
        qn.erase(c.b);
        if (q != c.a) {
          qn.insert(c.a);
          nbrs[ua].insert(q);
        }
      }
      nbrs[ua].erase(c.b);
      nbrs[ub].clear();
      ++version[ua];
      for (int q : nbrs[ua]) push(c.a, q);
      --live;
    }
    const bool reached = live <= target && live < out.levels.back().region_count;
    if (!reached) {
      out.levels.push_back(out.levels.back());
      std::vector<int> same(static_cast<std::size_t>(out.levels.back().region_count));
      for (std::size_t i = 0; i < same.size(); ++i) same[i] = static_cast<int>(i);
      out.parents.push_back(std::move(same));
      out.duplicated.push_back(true);
      continue;
    }
    std::vector<int> rep(n);
    for (std::size_t r = 0; r < n; ++r) rep[r] = root(static_cast<int>(r));
    LabelMap level = snapshot(finest, rep);
    const LabelMap& prev = out.levels.back();
    std::vector<int> up(static_cast<std::size_t>(prev.region_count), -1);
    for (std::size_t i = 0; i < level.labels.size(); ++i)
      up[static_cast<std::size_t>(prev.labels[i])] = level.labels[i];
    out.levels.push_back(std::move(level));
    out.parents.push_back(std::move(up));
    out.duplicated.push_back(false);
  }
  return out;
}

MultiLevelPartition segment_levels(const RasterImage& img, const MultisegConfig& cfg) {
  const LabelMap finest = felzenszwalb_segment(img, cfg.felz_k, cfg.felz_min_size, cfg.felz_sigma);
  return build_hierarchy(finest, img, cfg);
}

}  // namespace salmap
