#include "sakf/imgproc.hpp"

namespace sakf {

GrayImage to_grayscale(const RgbImage& image) {
  if (image.width < 1 || image.height < 1)
    throw ValidationError("to_grayscale: zero-dimension raster");
  GrayImage out(image.height, image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double luma =
          0.299 * image.r(y, x) + 0.587 * image.g(y, x) + 0.114 * image.b(y, x);
      out(y, x) = std::round(luma);
    }
  }
  return out;
}

}  // namespace sakf
