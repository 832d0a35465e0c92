#pragma once

#include "salmap/imgcore/color.hpp"
#include "salmap/imgcore/distance.hpp"
#include "salmap/imgcore/geometry.hpp"
#include "salmap/imgcore/histogram.hpp"
#include "salmap/imgcore/morphology.hpp"
#include "salmap/imgcore/raster.hpp"
#include "salmap/imgcore/resample.hpp"
