#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sakf/classify.hpp"
#include "sakf/encode.hpp"
#include "sakf/sakf.hpp"
#include "sakf/types.hpp"

namespace sakf {

struct DatasetItem {
  std::filesystem::path path;
  int label = 0;  // index into Dataset::classes
};

// Directory-per-class image collection. Class order is lexicographic.
struct Dataset {
  std::vector<DatasetItem> items;
  std::vector<std::string> classes;

  std::size_t size() const { return items.size(); }
};

// Scans root/<class>/<image>.{png,jpg,jpeg}; every file must be readable.
Dataset load_dataset(const std::filesystem::path& root);

// Which dictionary the BoVW histogram is built over.
enum class EncodeDict : std::uint8_t { fg = 0, combined = 1 };

const char* to_string(EncodeDict e);
EncodeDict parse_encode_dict(const std::string& s);

struct PipelineConfig {
  int step = 7;             // dense grid stride
  int patch_size = 7;       // dense patch side
  int k_fg = 2048;          // foreground dictionary words
  int k_bg = 2048;          // background dictionary words
  double sigma = 12.0;      // signature blurring factor on the working grid
  int working_width = 64;   // saliency working grid width
  double svm_c = 1.0;       // SVM regularization
  std::uint64_t seed = 0;
  double train_ratio = 0.75;
  int runs = 5;
  EncodeDict encode_dict = EncodeDict::fg;
  int kmeans_max_iters = 100;
  double kmeans_tol = 1e-4;

  void validate() const;
  bool operator==(const PipelineConfig&) const = default;
};

struct FallbackSummary {
  std::int64_t images = 0;        // images pushed through the encode path
  std::int64_t filter_empty = 0;  // filter kept nothing, d_F used instead
  std::int64_t fg_empty = 0;      // no foreground descriptors, all used

  bool operator==(const FallbackSummary&) const = default;
};

struct TrainedModel {
  PipelineConfig config;  // snapshot; fully determines future preprocessing
  std::vector<std::string> classes;
  DualDictionaries dicts;
  LinearSVMModel svm;
  FallbackSummary fallbacks;  // from the training encode pass
};

bool models_equal(const TrainedModel& a, const TrainedModel& b);

struct PredictDiagnostics {
  int keypoints_total = 0;
  int keypoints_fg = 0;
  int keypoints_kept = 0;  // size of the filter's kept set, before any fallback
  Fallback fallback = Fallback::none;
};

struct Prediction {
  int label = 0;
  std::string label_name;
  Vector<double> scores;  // per class, label-table order
  PredictDiagnostics diagnostics;
};

struct EvalReport {
  std::vector<double> run_accuracy;  // % correctly classified, one per run
  double mean_accuracy = 0.0;
  double stddev_accuracy = 0.0;
  Matrix<std::int64_t> confusion;  // final run; rows = true class, cols = predicted
  std::vector<std::string> classes;
  FallbackSummary fallbacks;                   // aggregated across runs
  std::vector<std::string> zero_test_classes;  // too small to contribute test items
  bool baseline = false;

  std::string to_text() const;
  std::string to_csv() const;
};

// One row of `eval --dump-features` output: the encoded vector of one image.
struct FeatureDumpRow {
  std::string label;
  Vector<double> values;
};

// Per class: deterministic shuffle, then ceil(ratio * n) items to train and
// the remainder to test. Train and test are disjoint and cover the dataset.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double ratio,
                                             std::uint64_t seed);

// Full SAKF training: saliency-partitioned dense SIFT, dual dictionaries,
// distance filtering, BoVW encoding, one-vs-rest SVM.
TrainedModel train_pipeline(const Dataset& train, const PipelineConfig& cfg);

Prediction predict_image(const TrainedModel& model, const std::filesystem::path& image);

// The published evaluation protocol: `runs` stratified splits (run i uses
// seed + i), one model per run, accuracy on the held-out quarter. When
// `dump` is given it receives the final run's encoding of every dataset item.
EvalReport evaluate(const Dataset& ds, const PipelineConfig& cfg,
                    std::vector<FeatureDumpRow>* dump = nullptr);

// Same protocol without saliency, partitioning or filtering: every dense
// descriptor trains one k_fg dictionary and all of them are encoded.
EvalReport evaluate_baseline(const Dataset& ds, const PipelineConfig& cfg,
                             std::vector<FeatureDumpRow>* dump = nullptr);

}  // namespace sakf
