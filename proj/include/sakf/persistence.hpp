#pragma once

#include <filesystem>

#include "sakf/pipeline.hpp"

namespace sakf {

// Single-file model container, version 1. Little-endian throughout:
// magic "SAKF", u16 version, config block, label table, VD_F, VD_B
// (f32 words), SVM weights (f64), trailing CRC32 of all preceding bytes.
// The exact field layout is documented in the README.
inline constexpr std::uint16_t kModelFormatVersion = 1;

// Byte-deterministic for identical models; atomic (temp file + rename).
void save_model(const TrainedModel& model, const std::filesystem::path& path);

// Verifies magic and version first, then the checksum, then materializes.
// Bad magic, unsupported versions and corruption each get a distinct error.
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace sakf
