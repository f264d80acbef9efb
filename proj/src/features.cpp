#include "sakf/features.hpp"

#include <cmath>

namespace sakf {

namespace {
constexpr int kSpatialBins = 4;
constexpr int kOrientationBins = 8;
constexpr double kClipThreshold = 0.2;
constexpr double kTwoPi = 2.0 * EIGEN_PI;
}  // namespace

std::vector<Keypoint> dense_grid(int width, int height, int step, int size) {
  if (step < 1) throw ValidationError("dense_grid: step must be >= 1");
  if (size < 1) throw ValidationError("dense_grid: size must be >= 1");

  std::vector<Keypoint> grid;
  const int center_off = (size - 1) / 2;
  for (int ty = 0; ty + size <= height; ty += step)
    for (int tx = 0; tx + size <= width; tx += step)
      grid.push_back({tx + center_off, ty + center_off, size});
  return grid;
}

Descriptor sift_descriptor(const GrayImage& img, const Keypoint& kp) {
  const int size = kp.size;
  const int x0 = kp.x - (size - 1) / 2;
  const int y0 = kp.y - (size - 1) / 2;
  if (size < 1 || x0 < 0 || y0 < 0 || x0 + size > img.cols() || y0 + size > img.rows())
    throw ValidationError("sift_descriptor: patch out of bounds");

  const double cell = double(size) / kSpatialBins;
  const double center = 0.5 * (size - 1);
  const double sigma = 0.5 * size;
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);

  DescriptorValues hist = DescriptorValues::Zero();
  for (int py = 0; py < size; ++py) {
    for (int px = 0; px < size; ++px) {
      // Central differences, indices replicated at the patch border.
      const int xl = x0 + std::max(px - 1, 0), xr = x0 + std::min(px + 1, size - 1);
      const int yu = y0 + std::max(py - 1, 0), yd = y0 + std::min(py + 1, size - 1);
      const double gx = 0.5 * (img(y0 + py, xr) - img(y0 + py, xl));
      const double gy = 0.5 * (img(yd, x0 + px) - img(yu, x0 + px));
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;

      double theta = std::atan2(gy, gx);
      if (theta < 0.0) theta += kTwoPi;
      double obin = theta * kOrientationBins / kTwoPi;
      if (obin >= kOrientationBins) obin -= kOrientationBins;
      const int o0 = static_cast<int>(obin);
      const double fo = obin - o0;

      const double u = (px + 0.5) / cell - 0.5;
      const double v = (py + 0.5) / cell - 0.5;
      const int u0 = static_cast<int>(std::floor(u));
      const int v0 = static_cast<int>(std::floor(v));
      const double fu = u - u0;
      const double fv = v - v0;

      const double dx = px - center, dy = py - center;
      const double w = mag * std::exp(-(dx * dx + dy * dy) * inv_two_sigma_sq);

      for (int dv = 0; dv < 2; ++dv) {
        const int cy = v0 + dv;
        if (cy < 0 || cy >= kSpatialBins) continue;
        const double wy = dv == 0 ? 1.0 - fv : fv;
        for (int du = 0; du < 2; ++du) {
          const int cx = u0 + du;
          if (cx < 0 || cx >= kSpatialBins) continue;
          const double wx = du == 0 ? 1.0 - fu : fu;
          const int base = ((cy * kSpatialBins) + cx) * kOrientationBins;
          hist(base + o0) += w * wy * wx * (1.0 - fo);
          hist(base + (o0 + 1) % kOrientationBins) += w * wy * wx * fo;
        }
      }
    }
  }

  Descriptor d;
  d.keypoint = kp;
  const double norm = hist.norm();
  if (norm == 0.0) return d;
  hist /= norm;
  hist = hist.cwiseMin(kClipThreshold);
  hist /= hist.norm();
  // Re-normalization can push clipped components back above the cap; a final
  // clip keeps every component within it. The norm then sits at 1 for
  // ordinary patches and below 1 for strongly concentrated ones.
  d.values = hist.cwiseMin(kClipThreshold);
  return d;
}

std::vector<Descriptor> extract_dense_sift(const GrayImage& img, int step, int size) {
  const auto grid = dense_grid(static_cast<int>(img.cols()), static_cast<int>(img.rows()),
                               step, size);
  std::vector<Descriptor> descs;
  descs.reserve(grid.size());
  for (const auto& kp : grid) descs.push_back(sift_descriptor(img, kp));
  return descs;
}

}  // namespace sakf
