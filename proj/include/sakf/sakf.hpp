#pragma once

#include <cstdint>
#include <vector>

#include "sakf/types.hpp"
#include "sakf/vocab.hpp"

namespace sakf {

// Dense descriptors of one image split by the saliency mask at their
// keypoint centers: d_F (attention zone) and d_B (background).
struct PartitionedDescriptors {
  std::vector<Descriptor> foreground;
  std::vector<Descriptor> background;
};

// VD_F and VD_B, clustered from pooled foreground / background descriptors.
struct DualDictionaries {
  VisualDictionary fg;
  VisualDictionary bg;
};

// Degradation ladder for images whose mask or filter degenerates.
enum class Fallback : std::uint8_t {
  none = 0,
  filter_empty = 1,  // filter kept nothing; all of d_F was used
  fg_empty = 2,      // d_F itself was empty; every dense descriptor was used
};

const char* to_string(Fallback f);

struct FilterResult {
  std::vector<Descriptor> kept;
  Fallback fallback = Fallback::none;
};

// Splits descriptors by mask membership of their keypoint centers, keeping
// relative order within each side. A keypoint outside the mask is a
// programming error (the mask must match the source image's dimensions).
PartitionedDescriptors partition_descriptors(const std::vector<Descriptor>& descs,
                                             const BinaryMask& mask);

// K-means over the pooled foreground and background descriptors (all-zero
// descriptors excluded). Pooling follows the given dataset order; the
// background dictionary derives its seed as seed + 1. An empty pool on
// either side is a training error: sigma / threshold settings left no
// descriptors for that side.
DualDictionaries build_dual_dictionaries(
    const std::vector<PartitionedDescriptors>& training_partitions, int k_fg, int k_bg,
    std::uint64_t seed, int max_iters = 100, double tol = 1e-4);

// Keeps a foreground descriptor iff its nearest-word distance to VD_F does
// not exceed its distance to VD_B (ties kept). An empty result falls back to
// all of d_F; an empty d_F is reported so the caller can encode everything.
FilterResult sakf_filter(const std::vector<Descriptor>& d_f, const DualDictionaries& dicts);

}  // namespace sakf
