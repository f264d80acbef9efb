#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "sakf/image_io.hpp"
#include "sakf/types.hpp"

namespace sakf {

// Rec. 601 luma, rounded to nearest integer sample.
GrayImage to_grayscale(const RgbImage& image);

// Orthonormal 1-D DCT-II basis: row k holds a_k * cos(pi*(2j+1)*k / (2n)).
template <typename Scalar>
Matrix<Scalar> dct_basis(Eigen::Index n) {
  Matrix<Scalar> c(n, n);
  const Scalar a0 = std::sqrt(Scalar(1) / Scalar(n));
  const Scalar ak = std::sqrt(Scalar(2) / Scalar(n));
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index j = 0; j < n; ++j)
      c(k, j) = (k == 0 ? a0 : ak) *
                std::cos(Scalar(EIGEN_PI) * Scalar(2 * j + 1) * Scalar(k) / Scalar(2 * n));
  return c;
}

// Separable orthonormal type-II 2-D DCT: rows first, then columns.
template <typename Scalar>
Matrix<Scalar> dct2(const Matrix<Scalar>& img) {
  if (img.rows() < 1 || img.cols() < 1) throw ValidationError("dct2: empty input");
  const Matrix<Scalar> cr = dct_basis<Scalar>(img.rows());
  const Matrix<Scalar> cc = dct_basis<Scalar>(img.cols());
  return cr * img * cc.transpose();
}

// Exact inverse of dct2 up to floating-point tolerance; output is not clamped.
template <typename Scalar>
Matrix<Scalar> idct2(const Matrix<Scalar>& coef) {
  if (coef.rows() < 1 || coef.cols() < 1) throw ValidationError("idct2: empty input");
  const Matrix<Scalar> cr = dct_basis<Scalar>(coef.rows());
  const Matrix<Scalar> cc = dct_basis<Scalar>(coef.cols());
  return cr.transpose() * coef * cc;
}

// Corner-aligned bilinear resampling. The output is clamped to the input's
// value range, so it can never escape [min(input), max(input)].
template <typename Scalar>
Matrix<Scalar> resize_bilinear(const Matrix<Scalar>& img, Eigen::Index new_width,
                               Eigen::Index new_height) {
  if (img.rows() < 1 || img.cols() < 1) throw ValidationError("resize_bilinear: empty input");
  if (new_width < 1 || new_height < 1)
    throw ValidationError("resize_bilinear: target dimensions must be >= 1");

  const Eigen::Index w = img.cols(), h = img.rows();
  const Scalar sx = new_width > 1 ? Scalar(w - 1) / Scalar(new_width - 1) : Scalar(0);
  const Scalar sy = new_height > 1 ? Scalar(h - 1) / Scalar(new_height - 1) : Scalar(0);

  Matrix<Scalar> out(new_height, new_width);
  for (Eigen::Index oy = 0; oy < new_height; ++oy) {
    const Scalar fy = sy * Scalar(oy);
    const Eigen::Index y0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(fy), h - 1);
    const Eigen::Index y1 = std::min<Eigen::Index>(y0 + 1, h - 1);
    const Scalar ty = fy - Scalar(y0);
    for (Eigen::Index ox = 0; ox < new_width; ++ox) {
      const Scalar fx = sx * Scalar(ox);
      const Eigen::Index x0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(fx), w - 1);
      const Eigen::Index x1 = std::min<Eigen::Index>(x0 + 1, w - 1);
      const Scalar tx = fx - Scalar(x0);
      const Scalar top = (Scalar(1) - tx) * img(y0, x0) + tx * img(y0, x1);
      const Scalar bot = (Scalar(1) - tx) * img(y1, x0) + tx * img(y1, x1);
      out(oy, ox) = (Scalar(1) - ty) * top + ty * bot;
    }
  }
  const Scalar lo = img.minCoeff(), hi = img.maxCoeff();
  return out.cwiseMax(lo).cwiseMin(hi);
}

// Separable Gaussian convolution, kernel radius ceil(3*sigma), L1-normalized,
// borders handled by edge replication.
template <typename Scalar>
Matrix<Scalar> gaussian_blur(const Matrix<Scalar>& img, double sigma) {
  if (!(sigma > 0)) throw ValidationError("gaussian_blur: sigma must be > 0");
  if (img.rows() < 1 || img.cols() < 1) throw ValidationError("gaussian_blur: empty input");

  const Eigen::Index radius = static_cast<Eigen::Index>(std::ceil(3.0 * sigma));
  Vector<Scalar> kernel(2 * radius + 1);
  for (Eigen::Index i = -radius; i <= radius; ++i)
    kernel(i + radius) = std::exp(Scalar(-0.5) * Scalar(i) * Scalar(i) / Scalar(sigma * sigma));
  kernel /= kernel.sum();

  const Eigen::Index w = img.cols(), h = img.rows();
  Matrix<Scalar> tmp(h, w), out(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      Scalar acc = 0;
      for (Eigen::Index i = -radius; i <= radius; ++i) {
        const Eigen::Index xi = std::clamp<Eigen::Index>(x + i, 0, w - 1);
        acc += kernel(i + radius) * img(y, xi);
      }
      tmp(y, x) = acc;
    }
  }
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      Scalar acc = 0;
      for (Eigen::Index i = -radius; i <= radius; ++i) {
        const Eigen::Index yi = std::clamp<Eigen::Index>(y + i, 0, h - 1);
        acc += kernel(i + radius) * tmp(yi, x);
      }
      out(y, x) = acc;
    }
  }
  return out;
}

}  // namespace sakf
