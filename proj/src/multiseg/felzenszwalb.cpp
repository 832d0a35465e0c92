#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "salmap/imgcore/resample.hpp"
#include "salmap/multiseg.hpp"

namespace salmap {
namespace {

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0u);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // Smaller root index survives, which keeps results independent of call order.
  std::uint32_t join(std::uint32_t a, std::uint32_t b) {
    if (a > b) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return a;
  }
  std::uint32_t size(std::uint32_t root) const { return size_[root]; }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

struct Edge {
  float w;
  std::uint32_t a, b;
};

}  // namespace

LabelMap compact_labels(const LabelGrid& raw) {
  std::unordered_map<std::int32_t, std::int32_t> remap;
  LabelMap out{LabelGrid(raw.width(), raw.height()), 0};
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(raw[i], out.region_count);
    if (inserted) ++out.region_count;
    out.labels[i] = it->second;
  }
  return out;
}

std::vector<std::vector<int>> region_adjacency(const LabelMap& map) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(map.region_count));
  const auto& L = map.labels;
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x) {
      const int a = L(x, y);
      if (x + 1 < map.width() && L(x + 1, y) != a) {
        adj[static_cast<std::size_t>(a)].push_back(L(x + 1, y));
        adj[static_cast<std::size_t>(L(x + 1, y))].push_back(a);
      }
      if (y + 1 < map.height() && L(x, y + 1) != a) {
        adj[static_cast<std::size_t>(a)].push_back(L(x, y + 1));
        adj[static_cast<std::size_t>(L(x, y + 1))].push_back(a);
      }
    }
  for (auto& n : adj) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
  return adj;
}

namespace {

// Splits every label into its 4-connected pieces.
LabelMap split_four_connected(const LabelGrid& labels) {
  const int w = labels.width(), h = labels.height();
  LabelGrid out(w, h, -1);
  int next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    if (out[s] >= 0) continue;
    out[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(i % static_cast<std::size_t>(w));
      const int y = static_cast<int>(i / static_cast<std::size_t>(w));
      const std::pair<int, int> nbrs[4] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
      for (auto [nx, ny] : nbrs) {
        if (!labels.contains(nx, ny)) continue;
        const std::size_t j = labels.index(nx, ny);
        if (out[j] < 0 && labels[j] == labels[i]) {
          out[j] = next;
          stack.push_back(j);
        }
      }
    }
    ++next;
  }
  return LabelMap{std::move(out), next};
}

// Merges regions below min_size into the 4-adjacent neighbour with the
// nearest mean colour; repeats until none remain.
LabelMap absorb_small(LabelMap map, const std::vector<Plane>& rgb, int min_size) {
  while (map.region_count > 1) {
    const auto n = static_cast<std::size_t>(map.region_count);
    std::vector<std::size_t> area(n, 0);
    std::vector<std::array<double, 3>> sum(n, {0, 0, 0});
    for (std::size_t i = 0; i < map.labels.size(); ++i) {
      const auto r = static_cast<std::size_t>(map.labels[i]);
      ++area[r];
      for (std::size_t c = 0; c < 3; ++c) sum[r][c] += rgb[c][i];
    }
    std::vector<int> small;
    for (std::size_t r = 0; r < n; ++r)
      if (area[r] < static_cast<std::size_t>(min_size)) small.push_back(static_cast<int>(r));
    if (small.empty()) break;
    const auto adj = region_adjacency(map);
    std::vector<int> target(n);
    std::iota(target.begin(), target.end(), 0);
    std::vector<bool> touched(n, false);
    for (int r : small) {
      if (touched[static_cast<std::size_t>(r)]) continue;
      int best = -1;
      double best_d = 0.0;
      for (int q : adj[static_cast<std::size_t>(r)]) {
        double d = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
          const double diff = sum[static_cast<std::size_t>(r)][c] / area[static_cast<std::size_t>(r)] -
                              sum[static_cast<std::size_t>(q)][c] / area[static_cast<std::size_t>(q)];
          d += diff * diff;
        }
        if (best < 0 || d < best_d) {
          best = q;
          best_d = d;
        }
      }
      if (best < 0 || touched[static_cast<std::size_t>(best)]) continue;
      target[static_cast<std::size_t>(r)] = best;
      touched[static_cast<std::size_t>(r)] = touched[static_cast<std::size_t>(best)] = true;
    }
    LabelGrid merged(map.width(), map.height());
    for (std::size_t i = 0; i < map.labels.size(); ++i)
      merged[i] = target[static_cast<std::size_t>(map.labels[i])];
    map = compact_labels(merged);
  }
  return map;
}

}  // namespace

LabelMap felzenszwalb_segment(const RasterImage& img, double k, int min_size, double sigma) {
  if (img.channels() != 3) throw Error("graph segmentation needs a 3-channel image");
  const int w = img.width(), h = img.height();
  std::vector<Plane> smooth;
  for (int c = 0; c < 3; ++c) {
    Plane p = img.channel(c);
    for (double& v : p.raw()) v *= 255.0;
    smooth.push_back(gaussian_blur(p, sigma));
  }
  auto weight = [&](std::size_t i, std::size_t j) {
    double d = 0.0;
    for (const auto& p : smooth) d += (p[i] - p[j]) * (p[i] - p[j]);
    return static_cast<float>(std::sqrt(d));
  };

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(w) * h * 4);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto i = static_cast<std::uint32_t>(y * w + x);
      auto add = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) return;
        const auto j = static_cast<std::uint32_t>(ny * w + nx);
        edges.push_back({weight(i, j), i, j});
      };
      add(x + 1, y);
      add(x, y + 1);
      add(x + 1, y + 1);
      add(x + 1, y - 1);
    }
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.w < b.w; });

  const std::size_t n = static_cast<std::size_t>(w) * h;
  DisjointSet sets(n);
  std::vector<double> thresh(n, k);
  for (const auto& e : edges) {
    auto a = sets.find(e.a), b = sets.find(e.b);
    if (a == b) continue;
    if (e.w <= thresh[a] && e.w <= thresh[b]) {
      const auto root = sets.join(a, b);
      thresh[root] = e.w + k / sets.size(root);
    }
  }
  for (const auto& e : edges) {
    auto a = sets.find(e.a), b = sets.find(e.b);
    if (a != b && (sets.size(a) < static_cast<std::uint32_t>(min_size) ||
                   sets.size(b) < static_cast<std::uint32_t>(min_size)))
      sets.join(a, b);
  }

  LabelGrid raw(w, h);
  for (std::size_t i = 0; i < n; ++i) raw[i] = static_cast<std::int32_t>(sets.find(static_cast<std::uint32_t>(i)));
  LabelMap pieces = split_four_connected(raw);
  std::vector<Plane> rgb{img.channel(0), img.channel(1), img.channel(2)};
  return absorb_small(std::move(pieces), rgb, min_size);
}

}  // namespace salmap
