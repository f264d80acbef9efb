#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>

#include "sakf/pipeline.hpp"
#include "sakf/synthetic.hpp"

namespace testutil {

// Unique scratch directory, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("sakf_test_" + tag + "_" + std::to_string(counter.fetch_add(1)) + "_" +
             std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Small, quick pipeline configuration for unit-level end-to-end checks.
inline sakf::PipelineConfig quick_config() {
  sakf::PipelineConfig cfg;
  cfg.k_fg = 24;
  cfg.k_bg = 24;
  cfg.runs = 1;
  cfg.seed = 5;
  return cfg;
}

inline sakf::Dataset quick_dataset(const std::filesystem::path& dir, int per_class = 6,
                                   int size = 96, std::uint64_t seed = 2) {
  sakf::write_synthetic_dataset(dir, {per_class, size, seed});
  return sakf::load_dataset(dir);
}

}  // namespace testutil
