#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sakf {

// Dense row-major matrix templated on scalar. Rows index image y (height),
// columns index image x (width).
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Working image representation: luminance samples in [0, 255].
using GrayImage = Matrix<double>;

// Real DCT-II coefficients, same shape as the source image.
using CoefMatrix = Matrix<double>;

// Real-valued attention map in [0, 1].
using SaliencyMap = Matrix<double>;

// Foreground mask: 1 = attention zone, 0 = background.
using BinaryMask = Matrix<std::uint8_t>;

inline constexpr int kDescriptorDim = 128;  // 4x4 spatial cells x 8 orientation bins

using DescriptorValues = Eigen::Matrix<double, kDescriptorDim, 1>;

// Center of a square sampling patch, 0-based pixel coordinates.
struct Keypoint {
  int x = 0;     // patch center column
  int y = 0;     // patch center row
  int size = 0;  // patch side length in pixels

  bool operator==(const Keypoint&) const = default;
};

struct Descriptor {
  DescriptorValues values = DescriptorValues::Zero();
  Keypoint keypoint;
};

// Parameter/usage problems the caller can fix before any work starts.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Problems with input data, files or models discovered while working.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Broken invariants inside the pipeline itself; never user-correctable.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace sakf
