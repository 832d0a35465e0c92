#include "salmap/imgcore/morphology.hpp"

#include <algorithm>
#include <array>

#include "salmap/imgcore/distance.hpp"

namespace salmap {
namespace {

constexpr std::array<int, 8> kDx8 = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr std::array<int, 8> kDy8 = {0, 1, 1, 1, 0, -1, -1, -1};

}  // namespace

StructuringElement StructuringElement::disk(int radius) {
  if (radius < 1) throw Error("structuring element radius must be >= 1");
  return StructuringElement{radius};
}

// Disk dilation and erosion reduce to thresholding exact distance maps.
BinaryMask dilate(const BinaryMask& mask, StructuringElement se) {
  if (!mask.any()) return mask;
  const Plane d2 = squared_distance_to(mask);
  const double r2 = double(se.radius) * se.radius;
  BinaryMask out(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = d2[i] <= r2 ? 1 : 0;
  return out;
}

BinaryMask erode(const BinaryMask& mask, StructuringElement se) {
  const Plane d2 = squared_distance_to(mask.complement(), /*outside_is_target=*/true);
  const double r2 = double(se.radius) * se.radius;
  BinaryMask out(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = d2[i] > r2 ? 1 : 0;
  return out;
}

BinaryMask open(const BinaryMask& mask, StructuringElement se) { return dilate(erode(mask, se), se); }

BinaryMask close(const BinaryMask& mask, StructuringElement se) {
  // Evaluated on a canvas padded by the radius so that the dilation can
  // spill past the frame before the erosion; otherwise objects touching the
  // border would lose a band of width r.
  const int pad = se.radius + 1;
  BinaryMask big(mask.width() + 2 * pad, mask.height() + 2 * pad);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) big(x + pad, y + pad) = mask(x, y);
  const BinaryMask closed = erode(dilate(big, se), se);
  BinaryMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) out(x, y) = closed(x + pad, y + pad);
  return out;
}

BinaryMask fill_holes(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  BinaryMask reached(w, h);
  std::vector<std::size_t> stack;
  auto seed = [&](int x, int y) {
    if (!mask.test(x, y) && !reached.test(x, y)) {
      reached.set(x, y);
      stack.push_back(mask.index(x, y));
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int x = static_cast<int>(i % static_cast<std::size_t>(w));
    const int y = static_cast<int>(i / static_cast<std::size_t>(w));
    for (int k = 0; k < 8; ++k) {
      const int nx = x + kDx8[static_cast<std::size_t>(k)];
      const int ny = y + kDy8[static_cast<std::size_t>(k)];
      if (mask.contains(nx, ny)) seed(nx, ny);
    }
  }
  return reached.complement();
}

BinaryMask remove_small(const BinaryMask& mask, std::size_t min_area) {
  BinaryMask out(mask.width(), mask.height());
  for (const auto& c : connected_components(mask))
    if (c.area >= min_area)
      for (std::size_t i : c.pixels) out[i] = 1;
  return out;
}

BinaryMask morphology(const BinaryMask& mask, MorphOp op, StructuringElement se,
                      std::size_t min_area) {
  switch (op) {
    case MorphOp::Erode: return erode(mask, se);
    case MorphOp::Dilate: return dilate(mask, se);
    case MorphOp::Open: return open(mask, se);
    case MorphOp::Close: return close(mask, se);
    case MorphOp::FillHoles: return fill_holes(mask);
    case MorphOp::RemoveSmall: return remove_small(mask, min_area);
  }
  throw Error("unknown morphology operation");
}

LabelGrid label_components(const BinaryMask& mask, int* count) {
  const int w = mask.width();
  LabelGrid labels(w, mask.height(), -1);
  int next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || labels[start] >= 0) continue;
    labels[start] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(i % static_cast<std::size_t>(w));
      const int y = static_cast<int>(i / static_cast<std::size_t>(w));
      for (int k = 0; k < 8; ++k) {
        const int nx = x + kDx8[static_cast<std::size_t>(k)];
        const int ny = y + kDy8[static_cast<std::size_t>(k)];
        if (!mask.contains(nx, ny)) continue;
        const std::size_t j = mask.index(nx, ny);
        if (mask[j] && labels[j] < 0) {
          labels[j] = next;
          stack.push_back(j);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return labels;
}

std::vector<Component> connected_components(const BinaryMask& mask) {
  int n = 0;
  const LabelGrid labels = label_components(mask, &n);
  std::vector<Component> comps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) comps[static_cast<std::size_t>(i)].id = i;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    auto& c = comps[static_cast<std::size_t>(labels[i])];
    c.pixels.push_back(i);
    ++c.area;
  }
  return comps;
}

BinaryMask largest_component(const BinaryMask& mask) {
  const auto comps = connected_components(mask);
  BinaryMask out(mask.width(), mask.height());
  if (comps.empty()) return out;
  const auto best = std::max_element(comps.begin(), comps.end(), [](const auto& a, const auto& b) {
    return a.area < b.area;  // first of equal areas wins
  });
  for (std::size_t i : best->pixels) out[i] = 1;
  return out;
}

}  // namespace salmap
