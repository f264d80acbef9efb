#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "sakf/imgproc.hpp"

using sakf::GrayImage;
using sakf::Matrix;
using sakf::RgbImage;

namespace {

RgbImage solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  RgbImage img;
  img.width = w;
  img.height = h;
  img.pixels.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = r;
    img.pixels[i + 1] = g;
    img.pixels[i + 2] = b;
  }
  return img;
}

}  // namespace

TEST_CASE("to_grayscale applies Rec.601 luma with rounding") {
  CHECK(sakf::to_grayscale(solid(2, 2, 255, 255, 255))(0, 0) == doctest::Approx(255));
  for (const int g : {0, 1, 17, 128, 200, 254})
    CHECK(sakf::to_grayscale(solid(1, 1, g, g, g))(0, 0) == doctest::Approx(g));
  // 0.299 * 255 = 76.245 -> 76
  CHECK(sakf::to_grayscale(solid(1, 1, 255, 0, 0))(0, 0) == doctest::Approx(76));

  RgbImage empty;
  CHECK_THROWS_AS(sakf::to_grayscale(empty), sakf::ValidationError);
}

TEST_CASE("resize_bilinear identity and constant cases") {
  std::mt19937_64 rng(11);
  const GrayImage img = oracles::rand_matrix(9, 13, 0, 255, rng);
  const GrayImage same = sakf::resize_bilinear(img, 13, 9);
  CHECK((same - img).cwiseAbs().maxCoeff() == 0.0);

  const GrayImage c = GrayImage::Constant(5, 4, 42.0);
  const GrayImage up = sakf::resize_bilinear(c, 17, 11);
  CHECK(up.rows() == 11);
  CHECK(up.cols() == 17);
  CHECK((up.array() == 42.0).all());
}

TEST_CASE("resize_bilinear interpolates a 2x1 ramp to 3 samples") {
  GrayImage img(1, 2);
  img << 0.0, 100.0;
  const GrayImage out = sakf::resize_bilinear(img, 3, 1);
  CHECK(out(0, 0) == doctest::Approx(0.0));
  CHECK(out(0, 1) == doctest::Approx(50.0));
  CHECK(out(0, 2) == doctest::Approx(100.0));
}

TEST_CASE("resize_bilinear output stays within the input range") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto h = static_cast<Eigen::Index>(1 + rng() % 24);
    const auto w = static_cast<Eigen::Index>(1 + rng() % 24);
    const GrayImage img = oracles::rand_matrix(h, w, -30, 290, rng);
    const auto nh = static_cast<Eigen::Index>(1 + rng() % 40);
    const auto nw = static_cast<Eigen::Index>(1 + rng() % 40);
    const GrayImage out = sakf::resize_bilinear(img, nw, nh);
    CHECK(out.minCoeff() >= img.minCoeff());
    CHECK(out.maxCoeff() <= img.maxCoeff());
  }
  const GrayImage z = GrayImage::Zero(2, 2);
  CHECK_THROWS_AS(sakf::resize_bilinear(z, 0, 3), sakf::ValidationError);
}

TEST_CASE("dct2 of a constant image is DC-only") {
  const double c = 37.5;
  const GrayImage img = GrayImage::Constant(6, 9, c);
  const sakf::CoefMatrix coef = sakf::dct2(img);
  CHECK(coef(0, 0) == doctest::Approx(c * std::sqrt(6.0 * 9.0)).epsilon(1e-12));
  sakf::CoefMatrix rest = coef;
  rest(0, 0) = 0.0;
  CHECK(rest.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("dct2 matches the direct transform sum on a 2x2 impulse") {
  GrayImage img(2, 2);
  img << 1, 0, 0, 0;
  const sakf::CoefMatrix got = sakf::dct2(img);
  const sakf::CoefMatrix want = oracles::naive_dct2(img);
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("idct2 inverts dct2 on random images") {
  std::mt19937_64 rng(13);
  for (const auto size : {std::pair{1, 7}, {8, 8}, {31, 17}, {64, 128}, {256, 256}}) {
    const GrayImage img = oracles::rand_matrix(size.first, size.second, 0, 255, rng);
    const GrayImage back = sakf::idct2(sakf::dct2(img));
    CHECK((back - img).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("dct2 is linear") {
  std::mt19937_64 rng(14);
  const GrayImage x = oracles::rand_matrix(12, 10, 0, 255, rng);
  const GrayImage y = oracles::rand_matrix(12, 10, 0, 255, rng);
  const double a = 0.7, b = -1.3;
  const sakf::CoefMatrix lhs = sakf::dct2<double>(a * x + b * y);
  const sakf::CoefMatrix rhs = a * sakf::dct2(x) + b * sakf::dct2(y);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("idct2 handles zero, DC-only and one-hot spectra") {
  const sakf::CoefMatrix zero = sakf::CoefMatrix::Zero(5, 3);
  CHECK(sakf::idct2(zero).cwiseAbs().maxCoeff() == 0.0);

  sakf::CoefMatrix dc = sakf::CoefMatrix::Zero(4, 6);
  dc(0, 0) = 12.0;
  const GrayImage constant = sakf::idct2(dc);
  CHECK((constant.array() - constant(0, 0)).abs().maxCoeff() < 1e-12);

  sakf::CoefMatrix onehot = sakf::CoefMatrix::Zero(4, 4);
  onehot(1, 0) = 1.0;
  const GrayImage basis = sakf::idct2(onehot);
  const GrayImage want = oracles::naive_idct2(onehot);
  CHECK((basis - want).cwiseAbs().maxCoeff() < 1e-12);
  // the (1,0) basis image is a vertical cosine, constant along rows
  for (int r = 0; r < 4; ++r)
    CHECK((basis.row(r).array() - basis(r, 0)).abs().maxCoeff() < 1e-12);
}

TEST_CASE("gaussian_blur preserves constants and mass") {
  const Matrix<double> c = Matrix<double>::Constant(9, 9, 3.25);
  const Matrix<double> blurred = sakf::gaussian_blur(c, 1.7);
  CHECK((blurred - c).cwiseAbs().maxCoeff() < 1e-9);

  Matrix<double> impulse = Matrix<double>::Zero(21, 21);
  impulse(10, 10) = 1.0;
  const Matrix<double> out = sakf::gaussian_blur(impulse, 2.0);
  CHECK(out.sum() == doctest::Approx(1.0).epsilon(0.01));

  CHECK_THROWS_AS(sakf::gaussian_blur(c, 0.0), sakf::ValidationError);
  CHECK_THROWS_AS(sakf::gaussian_blur(c, -1.0), sakf::ValidationError);
}

TEST_CASE("gaussian_blur of a centered impulse is the kernel outer product") {
  Matrix<double> impulse = Matrix<double>::Zero(21, 21);
  impulse(10, 10) = 1.0;
  const double sigma = 2.0;
  const Matrix<double> out = sakf::gaussian_blur(impulse, sigma);

  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  Eigen::VectorXd kernel(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i)
    kernel(i + radius) = std::exp(-0.5 * i * i / (sigma * sigma));
  kernel /= kernel.sum();

  for (int y = 0; y < 21; ++y) {
    for (int x = 0; x < 21; ++x) {
      const int dy = y - 10, dx = x - 10;
      const double want = (std::abs(dy) <= radius && std::abs(dx) <= radius)
                              ? kernel(dy + radius) * kernel(dx + radius)
                              : 0.0;
      CHECK(out(y, x) == doctest::Approx(want).epsilon(1e-12));
    }
  }
}
