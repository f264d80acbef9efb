#include "sakf/encode.hpp"

namespace sakf {

BowVector bovw_encode(const std::vector<Descriptor>& descs, const VisualDictionary& dict) {
  if (dict.k() < 1) throw ValidationError("bovw_encode: empty dictionary");
  BowVector bow;
  bow.values = Vector<double>::Zero(dict.k());
  for (const auto& d : descs) bow.values(assign(d.values, dict)) += 1.0;
  bow.total_count = static_cast<std::int64_t>(descs.size());
  if (bow.total_count > 0) bow.values /= static_cast<double>(bow.total_count);
  return bow;
}

}  // namespace sakf
