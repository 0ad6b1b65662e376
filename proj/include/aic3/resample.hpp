#pragma once

#include "aic3/raster.hpp"

namespace aic3 {

// Lanczos window of order `taps` (support [-taps, taps]).
double lanczos_kernel(double x, int taps);

// Separable Lanczos resize. Pixel centers are aligned (half-pixel convention),
// borders are clamp-to-edge, weights are normalized per output sample, and the
// result is rounded half away from zero and clamped to [0, 255].
// Downscaling widens the kernel by the scale factor.
RasterImage resize_lanczos(const RasterImage& image, int out_width, int out_height, int taps = 3);

}  // namespace aic3
