#pragma once

#include "salmap/imgcore/raster.hpp"

namespace salmap {

/// Exact squared Euclidean distance from every pixel centre to the nearest
/// pixel where `targets` is set. With `outside_is_target`, the ring of
/// pixels just outside the frame also counts as target. Pixels with no
/// target anywhere get +infinity.
Plane squared_distance_to(const BinaryMask& targets, bool outside_is_target = false);

/// Signed distance of a mask: negative inside, positive outside, with the
/// zero crossing half-way between boundary pixel centres (|phi| = 0.5 on
/// both sides of the contour). Throws "degenerate mask" when the mask is
/// all true or all false.
LevelSetField signed_distance(const BinaryMask& mask);

}  // namespace salmap
