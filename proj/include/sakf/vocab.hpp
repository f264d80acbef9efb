#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sakf/types.hpp"

namespace sakf {

// K cluster centers in descriptor space, one row per visual word. Word order
// is deterministic given the seed and the input order.
struct VisualDictionary {
  Matrix<double> words;

  int k() const { return static_cast<int>(words.rows()); }
  int dim() const { return static_cast<int>(words.cols()); }
};

struct KMeansOptions {
  int k = 1;
  std::uint64_t seed = 0;
  int max_iters = 100;
  double tol = 1e-4;  // stop when no center moves more than this (Euclidean)
};

struct KMeansStats {
  // inertia[i] = sum of squared distances to the centers entering Lloyd
  // iteration i (so inertia.front() measures the k-means++ initialization).
  std::vector<double> inertia;
  int effective_k = 0;
  int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding. Empty clusters are reseeded to
// the point currently farthest from its assigned center. If fewer distinct
// points than k exist, k drops to the distinct count (reported via stats).
// Same inputs, options and seed reproduce the dictionary bit for bit,
// independent of the thread count.
VisualDictionary kmeans(const Matrix<double>& points, const KMeansOptions& opts,
                        KMeansStats* stats = nullptr);

// Index of the nearest word by Euclidean distance; ties go to the lowest index.
int assign(const DescriptorValues& d, const VisualDictionary& dict);

// Euclidean distance from d to its assigned word.
double min_distance(const DescriptorValues& d, const VisualDictionary& dict);

// Stacks descriptor values into a row-per-descriptor matrix, optionally
// skipping all-zero descriptors (dictionary training excludes them).
Matrix<double> stack_descriptors(std::span<const Descriptor> descs, bool drop_zero);

}  // namespace sakf
