#pragma once

#include <cstdint>
#include <vector>

#include "sakf/types.hpp"
#include "sakf/vocab.hpp"

namespace sakf {

// L1-normalized visual-word histogram; the final per-image feature vector.
struct BowVector {
  Vector<double> values;
  std::int64_t total_count = 0;
};

// Hard assignment: count each descriptor's nearest word, then divide by the
// number of descriptors. An empty input yields the all-zero vector.
BowVector bovw_encode(const std::vector<Descriptor>& descs, const VisualDictionary& dict);

}  // namespace sakf
