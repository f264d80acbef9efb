#pragma once

#include <cstdint>
#include <filesystem>

#include "sakf/types.hpp"

namespace sakf {

// Generates a small directory-per-class demo dataset: bright geometric
// shapes (disc / box / wedge) over textured dark-noise backgrounds.
// Deterministic for a given seed. Useful for exercising the full pipeline
// without a real dataset.
struct SyntheticOptions {
  int images_per_class = 20;
  int image_size = 128;
  std::uint64_t seed = 0;
};

void write_synthetic_dataset(const std::filesystem::path& root, const SyntheticOptions& opts);

}  // namespace sakf
