#pragma once

#include <cstddef>
#include <vector>

#include "salmap/imgcore/raster.hpp"

namespace salmap {

/// Flat disk {(dx,dy) : dx^2 + dy^2 <= r^2}.
struct StructuringElement {
  int radius = 1;

  static StructuringElement disk(int radius);
};

enum class MorphOp { Erode, Dilate, Open, Close, FillHoles, RemoveSmall };

/// Binary morphology. Pixels outside the image count as false. `min_area`
/// is only used by RemoveSmall (8-connected components with fewer pixels are
/// dropped); `se` is ignored by FillHoles and RemoveSmall.
BinaryMask morphology(const BinaryMask& mask, MorphOp op, StructuringElement se = {},
                      std::size_t min_area = 0);

BinaryMask erode(const BinaryMask& mask, StructuringElement se);
BinaryMask dilate(const BinaryMask& mask, StructuringElement se);
BinaryMask open(const BinaryMask& mask, StructuringElement se);
BinaryMask close(const BinaryMask& mask, StructuringElement se);
BinaryMask fill_holes(const BinaryMask& mask);
BinaryMask remove_small(const BinaryMask& mask, std::size_t min_area);

struct Component {
  int id = 0;
  std::size_t area = 0;
  std::vector<std::size_t> pixels;  // linear indices, raster order
};

/// 8-connected components, numbered in raster order of their first pixel.
std::vector<Component> connected_components(const BinaryMask& mask);

/// Label grid version: -1 for background, component id otherwise.
LabelGrid label_components(const BinaryMask& mask, int* count = nullptr);

BinaryMask largest_component(const BinaryMask& mask);

}  // namespace salmap
