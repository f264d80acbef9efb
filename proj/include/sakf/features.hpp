#pragma once

#include <vector>

#include "sakf/types.hpp"

namespace sakf {

// Regular grid of patch centers. Patches are laid out from the top-left
// corner with the given stride; the center of a size-s patch sits (s-1)/2
// pixels in (the 1-based ceil(s/2) convention). Keypoints are emitted in
// row-major order. An image smaller than `size` yields an empty grid.
std::vector<Keypoint> dense_grid(int width, int height, int step, int size);

// Upright 4x4x8 SIFT descriptor of the patch around kp. Gradients are central
// differences with edge replication at the patch border, accumulated with
// bilinear spatial and linear orientation interpolation under a Gaussian
// window of sigma = size/2. L2-normalized, clipped at 0.2, re-normalized;
// a gradient-free patch yields the all-zero descriptor.
Descriptor sift_descriptor(const GrayImage& img, const Keypoint& kp);

// dense_grid + sift_descriptor per keypoint, preserving grid order. All-zero
// descriptors are kept; they still carry their position.
std::vector<Descriptor> extract_dense_sift(const GrayImage& img, int step, int size);

}  // namespace sakf
