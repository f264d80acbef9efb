#include "sakf/saliency.hpp"

#include <array>
#include <cmath>

#include "sakf/imgproc.hpp"

namespace sakf {

namespace {

// sign() with a relative dead zone: coefficients within 1e-8 of zero (scaled
// by the largest magnitude) count as zero. A constant image produces off-DC
// coefficients that are pure rounding dust; treating them as signal would
// break the all-zero-map contract for degenerate inputs.
CoefMatrix sign_map(const CoefMatrix& coef) {
  const double eps = 1e-8 * std::max(1.0, coef.cwiseAbs().maxCoeff());
  CoefMatrix out(coef.rows(), coef.cols());
  for (Eigen::Index i = 0; i < coef.size(); ++i) {
    const double v = coef.data()[i];
    out.data()[i] = v > eps ? 1.0 : (v < -eps ? -1.0 : 0.0);
  }
  return out;
}

}  // namespace

SaliencyMap image_signature(const GrayImage& img, const SaliencyConfig& cfg) {
  cfg.validate();
  if (img.rows() < 1 || img.cols() < 1) throw ValidationError("image_signature: empty image");

  const Eigen::Index src_w = img.cols(), src_h = img.rows();
  const Eigen::Index work_w = cfg.working_width;
  const Eigen::Index work_h = std::max<Eigen::Index>(
      8, static_cast<Eigen::Index>(std::lround(double(src_h) * double(work_w) / double(src_w))));

  const GrayImage small = resize_bilinear(img, work_w, work_h);
  const CoefMatrix recon = idct2(sign_map(dct2(small)));
  const SaliencyMap smoothed = gaussian_blur<double>(recon.cwiseProduct(recon), cfg.sigma);

  // Upsample first, normalize after: the final map's maximum must be an
  // actual sample, which interpolating an already-normalized map would not
  // guarantee.
  const SaliencyMap full = resize_bilinear(smoothed, src_w, src_h);
  const double lo = full.minCoeff(), hi = full.maxCoeff();
  if (!(hi > lo)) return SaliencyMap::Zero(src_h, src_w);
  return (full.array() - lo) / (hi - lo);
}

double otsu_threshold(const SaliencyMap& map) {
  if (map.size() < 1) throw ValidationError("otsu_threshold: empty map");

  std::array<std::int64_t, 256> hist{};
  for (Eigen::Index i = 0; i < map.size(); ++i) {
    const int bin = std::min(255, static_cast<int>(map.data()[i] * 256.0));
    hist[static_cast<std::size_t>(std::max(0, bin))] += 1;
  }

  int levels = 0;
  for (const auto c : hist) levels += c > 0;
  if (levels <= 1) return 0.0;

  const double total = static_cast<double>(map.size());
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += double(i) * double(hist[i]);

  int best_t = 0;
  double best_var = -1.0;
  double w0 = 0.0, sum0 = 0.0;
  for (int t = 0; t < 256; ++t) {
    w0 += double(hist[t]);
    sum0 += double(t) * double(hist[t]);
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double mu0 = sum0 / w0;
    const double mu1 = (sum_all - sum0) / w1;
    const double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (var > best_var) {  // strict: ties keep the lower threshold
      best_var = var;
      best_t = t;
    }
  }
  return double(best_t + 1) / 256.0;
}

BinaryMask binarize(const SaliencyMap& map, double t) {
  if (!(t >= 0.0 && t < 1.0)) throw ValidationError("binarize: threshold must be in [0, 1)");
  BinaryMask mask(map.rows(), map.cols());
  for (Eigen::Index i = 0; i < map.size(); ++i)
    mask.data()[i] = map.data()[i] > t ? 1 : 0;
  return mask;
}

}  // namespace sakf
