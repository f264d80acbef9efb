#include "sakf/sakf.hpp"

namespace sakf {

const char* to_string(Fallback f) {
  switch (f) {
    case Fallback::filter_empty:
      return "filter_empty";
    case Fallback::fg_empty:
      return "fg_empty";
    default:
      return "none";
  }
}

PartitionedDescriptors partition_descriptors(const std::vector<Descriptor>& descs,
                                             const BinaryMask& mask) {
  PartitionedDescriptors out;
  for (const auto& d : descs) {
    const auto& kp = d.keypoint;
    if (kp.x < 0 || kp.y < 0 || kp.x >= mask.cols() || kp.y >= mask.rows())
      throw InternalError("partition_descriptors: keypoint outside mask bounds");
    if (mask(kp.y, kp.x) == 1)
      out.foreground.push_back(d);
    else
      out.background.push_back(d);
  }
  return out;
}

DualDictionaries build_dual_dictionaries(
    const std::vector<PartitionedDescriptors>& training_partitions, int k_fg, int k_bg,
    std::uint64_t seed, int max_iters, double tol) {
  std::vector<Descriptor> fg_pool, bg_pool;
  for (const auto& p : training_partitions) {
    fg_pool.insert(fg_pool.end(), p.foreground.begin(), p.foreground.end());
    bg_pool.insert(bg_pool.end(), p.background.begin(), p.background.end());
  }

  const Matrix<double> fg = stack_descriptors(fg_pool, /*drop_zero=*/true);
  const Matrix<double> bg = stack_descriptors(bg_pool, /*drop_zero=*/true);
  if (fg.rows() < 1)
    throw DataError(
        "dictionary training: no usable foreground descriptors pooled across the training "
        "set; review sigma / threshold settings");
  if (bg.rows() < 1)
    throw DataError(
        "dictionary training: no usable background descriptors pooled across the training "
        "set; review sigma / threshold settings");

  DualDictionaries dicts;
  dicts.fg = kmeans(fg, {.k = k_fg, .seed = seed, .max_iters = max_iters, .tol = tol});
  dicts.bg = kmeans(bg, {.k = k_bg, .seed = seed + 1, .max_iters = max_iters, .tol = tol});
  return dicts;
}

FilterResult sakf_filter(const std::vector<Descriptor>& d_f, const DualDictionaries& dicts) {
  if (dicts.fg.k() < 1 || dicts.bg.k() < 1)
    throw ValidationError("sakf_filter: both dictionaries must be non-empty");
  if (d_f.empty()) return {{}, Fallback::fg_empty};

  FilterResult result;
  for (const auto& d : d_f)
    if (min_distance(d.values, dicts.fg) <= min_distance(d.values, dicts.bg))
      result.kept.push_back(d);

  if (result.kept.empty()) {
    result.kept = d_f;
    result.fallback = Fallback::filter_empty;
  }
  return result;
}

}  // namespace sakf
