#pragma once

#include "sakf/types.hpp"

namespace sakf {

struct SaliencyConfig {
  double sigma = 12.0;     // blurring factor on the working grid
  int working_width = 64;  // width of the downsampled signature grid

  void validate() const {
    if (!(sigma > 0)) throw ValidationError("sigma must be > 0");
    if (working_width < 8) throw ValidationError("working_width must be >= 8");
  }
};

// Image-signature saliency: reconstruct the foreground from the sign of the
// DCT coefficients on a downsampled grid, square it, blur with sigma, min-max
// normalize to [0,1] and upsample back to the source resolution. A degenerate
// map (max == min) comes back all zero.
SaliencyMap image_signature(const GrayImage& img, const SaliencyConfig& cfg);

// Threshold over 256 equal-width bins of [0,1] maximizing between-class
// variance; ties go to the lower threshold. Single-level histograms yield 0.
double otsu_threshold(const SaliencyMap& map);

// mask(p) = 1 iff map(p) > t. Requires t in [0, 1).
BinaryMask binarize(const SaliencyMap& map, double t);

}  // namespace sakf
