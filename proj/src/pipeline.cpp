#include "sakf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

#include "sakf/features.hpp"
#include "sakf/image_io.hpp"
#include "sakf/imgproc.hpp"
#include "sakf/parallel.hpp"
#include "sakf/saliency.hpp"

namespace sakf {

namespace fs = std::filesystem;

namespace {

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

GrayImage load_gray(const fs::path& path) { return to_grayscale(load_image(path)); }

PartitionedDescriptors extract_partitioned(const GrayImage& img, const PipelineConfig& cfg) {
  const SaliencyMap sm = image_signature(img, {cfg.sigma, cfg.working_width});
  const BinaryMask mask = binarize(sm, otsu_threshold(sm));
  return partition_descriptors(extract_dense_sift(img, cfg.step, cfg.patch_size), mask);
}

// Model precision: dictionaries are persisted as 32-bit floats, so they are
// rounded to that grid right after clustering. Everything downstream (the
// filter, the encoder, the SVM) then sees exactly what a reloaded model sees.
void quantize_words(VisualDictionary& dict) {
  dict.words = dict.words.cast<float>().cast<double>();
}

VisualDictionary encode_dictionary(const TrainedModel& model) {
  if (model.config.encode_dict == EncodeDict::fg) return model.dicts.fg;
  VisualDictionary combined;
  combined.words.resize(model.dicts.fg.k() + model.dicts.bg.k(), kDescriptorDim);
  combined.words.topRows(model.dicts.fg.k()) = model.dicts.fg.words;
  combined.words.bottomRows(model.dicts.bg.k()) = model.dicts.bg.words;
  return combined;
}

struct EncodeOutcome {
  BowVector bow;
  PredictDiagnostics diag;
};

EncodeOutcome encode_partitioned(const PartitionedDescriptors& parts,
                                 const DualDictionaries& dicts,
                                 const VisualDictionary& encode_words) {
  EncodeOutcome out;
  out.diag.keypoints_fg = static_cast<int>(parts.foreground.size());
  out.diag.keypoints_total =
      static_cast<int>(parts.foreground.size() + parts.background.size());

  const FilterResult fr = sakf_filter(parts.foreground, dicts);
  out.diag.fallback = fr.fallback;
  if (fr.fallback == Fallback::fg_empty) {
    out.diag.keypoints_kept = 0;
    std::vector<Descriptor> all = parts.foreground;
    all.insert(all.end(), parts.background.begin(), parts.background.end());
    out.bow = bovw_encode(all, encode_words);
  } else {
    out.diag.keypoints_kept = static_cast<int>(fr.kept.size());
    out.bow = bovw_encode(fr.kept, encode_words);
  }

  if (out.diag.keypoints_kept > out.diag.keypoints_fg ||
      out.diag.keypoints_fg > out.diag.keypoints_total)
    throw InternalError("encode: kept <= d_F <= grid count violated");
  return out;
}

template <typename Fn>
auto annotate_item(const Dataset& ds, std::size_t index, Fn&& fn) {
  try {
    return fn();
  } catch (const DataError& e) {
    std::ostringstream msg;
    msg << "item #" << index << " (" << ds.items[index].path.string() << "): " << e.what();
    throw DataError(msg.str());
  }
}

double percent(std::int64_t hits, std::int64_t total) {
  return 100.0 * static_cast<double>(hits) / static_cast<double>(total);
}

std::string format_pct(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

// Training counts never depend on the run seed, only on class sizes, so the
// zero-test-item flag can be computed once per dataset.
std::vector<std::string> flag_zero_test_classes(const Dataset& ds, double ratio) {
  std::vector<std::string> flagged;
  for (std::size_t c = 0; c < ds.classes.size(); ++c) {
    std::int64_t n = 0;
    for (const auto& item : ds.items) n += item.label == static_cast<int>(c);
    const auto train_n =
        static_cast<std::int64_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
    if (n - train_n <= 0) flagged.push_back(ds.classes[c]);
  }
  return flagged;
}

}  // namespace

const char* to_string(EncodeDict e) { return e == EncodeDict::fg ? "fg" : "combined"; }

EncodeDict parse_encode_dict(const std::string& s) {
  if (s == "fg") return EncodeDict::fg;
  if (s == "combined") return EncodeDict::combined;
  throw ValidationError("encode-dict must be 'fg' or 'combined', got '" + s + "'");
}

void PipelineConfig::validate() const {
  if (step < 1) throw ValidationError("step must be >= 1");
  if (patch_size < 1) throw ValidationError("patch size must be >= 1");
  if (k_fg < 1 || k_bg < 1) throw ValidationError("dictionary sizes must be >= 1");
  if (!(sigma > 0)) throw ValidationError("sigma must be > 0");
  if (working_width < 8) throw ValidationError("working width must be >= 8");
  if (!(svm_c > 0)) throw ValidationError("svm C must be > 0");
  if (!(train_ratio > 0.0 && train_ratio < 1.0))
    throw ValidationError("train ratio must be in (0, 1)");
  if (runs < 1) throw ValidationError("runs must be >= 1");
  if (kmeans_max_iters < 1) throw ValidationError("kmeans max iters must be >= 1");
  if (!(kmeans_tol > 0)) throw ValidationError("kmeans tolerance must be > 0");
}

Dataset load_dataset(const fs::path& root) {
  if (!fs::is_directory(root))
    throw DataError("dataset root is not a directory: " + root.string());

  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    if (!name.empty() && name[0] != '.') class_dirs.push_back(entry.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.size() < 2)
    throw DataError("dataset needs at least 2 class subdirectories under " + root.string());

  Dataset ds;
  for (const auto& dir : class_dirs) {
    const int label = static_cast<int>(ds.classes.size());
    ds.classes.push_back(dir.filename().string());

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && has_image_extension(entry.path()))
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw DataError("class directory has no PNG/JPEG images: " + dir.string());

    for (auto& f : files) {
      std::error_code ec;
      const auto status = fs::status(f, ec);
      if (ec || !fs::is_regular_file(status))
        throw DataError("dataset item not readable: " + f.string());
      ds.items.push_back({std::move(f), label});
    }
  }
  return ds;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double ratio,
                                             std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw ValidationError("stratified_split: ratio must be in (0, 1)");

  std::vector<std::vector<std::size_t>> per_class(ds.classes.size());
  for (std::size_t i = 0; i < ds.items.size(); ++i)
    per_class[static_cast<std::size_t>(ds.items[i].label)].push_back(i);
  for (std::size_t c = 0; c < per_class.size(); ++c)
    if (per_class[c].size() < 2)
      throw DataError("class '" + ds.classes[c] + "' has fewer than 2 items");

  Dataset train{{}, ds.classes}, test{{}, ds.classes};
  std::mt19937_64 rng(seed);
  for (auto& indices : per_class) {
    for (std::size_t i = indices.size() - 1; i > 0; --i)
      std::swap(indices[i], indices[rng() % (i + 1)]);
    // The epsilon guards inexact ratios (0.9 * 10 must still ceil to 9).
    const auto n_train = static_cast<std::size_t>(
        std::ceil(ratio * static_cast<double>(indices.size()) - 1e-9));
    for (std::size_t i = 0; i < indices.size(); ++i)
      (i < n_train ? train : test).items.push_back(ds.items[indices[i]]);
  }

  std::set<std::string> train_paths, test_paths;
  for (const auto& it : train.items) train_paths.insert(it.path.string());
  for (const auto& it : test.items) test_paths.insert(it.path.string());
  if (train.items.size() + test.items.size() != ds.items.size())
    throw InternalError("stratified_split: split does not cover the dataset");
  for (const auto& p : test_paths)
    if (train_paths.count(p)) throw InternalError("stratified_split: overlapping split");
  return {std::move(train), std::move(test)};
}

TrainedModel train_pipeline(const Dataset& train, const PipelineConfig& cfg) {
  cfg.validate();
  if (train.classes.size() < 2) throw DataError("training needs at least 2 classes");
  if (train.items.empty()) throw DataError("training set is empty");

  std::vector<PartitionedDescriptors> parts(train.items.size());
  parallel_for(0, train.items.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      parts[i] = annotate_item(train, i, [&] {
        return extract_partitioned(load_gray(train.items[i].path), cfg);
      });
  });

  TrainedModel model;
  model.config = cfg;
  model.classes = train.classes;
  model.dicts = build_dual_dictionaries(parts, cfg.k_fg, cfg.k_bg, cfg.seed,
                                        cfg.kmeans_max_iters, cfg.kmeans_tol);
  quantize_words(model.dicts.fg);
  quantize_words(model.dicts.bg);

  const VisualDictionary enc = encode_dictionary(model);
  Matrix<double> features(static_cast<Eigen::Index>(train.items.size()), enc.k());
  std::vector<Fallback> fallbacks(train.items.size(), Fallback::none);
  parallel_for(0, train.items.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const EncodeOutcome out = encode_partitioned(parts[i], model.dicts, enc);
      features.row(static_cast<Eigen::Index>(i)) = out.bow.values.transpose();
      fallbacks[i] = out.diag.fallback;
    }
  });

  model.fallbacks.images = static_cast<std::int64_t>(train.items.size());
  for (const Fallback f : fallbacks) {
    model.fallbacks.filter_empty += f == Fallback::filter_empty;
    model.fallbacks.fg_empty += f == Fallback::fg_empty;
  }

  std::vector<int> labels(train.items.size());
  for (std::size_t i = 0; i < train.items.size(); ++i) labels[i] = train.items[i].label;
  model.svm = train_svm(features, labels, static_cast<int>(train.classes.size()),
                        {.c = cfg.svm_c, .seed = cfg.seed});
  return model;
}

Prediction predict_image(const TrainedModel& model, const fs::path& image) {
  const PartitionedDescriptors parts =
      extract_partitioned(load_gray(image), model.config);
  const EncodeOutcome out = encode_partitioned(parts, model.dicts, encode_dictionary(model));

  Prediction pred;
  pred.diagnostics = out.diag;
  pred.label = predict(model.svm, out.bow.values, &pred.scores);
  pred.label_name = model.classes[static_cast<std::size_t>(pred.label)];
  return pred;
}

namespace {

// Baseline sibling of TrainedModel: one dictionary over every descriptor.
struct BaselineModel {
  VisualDictionary dict;
  LinearSVMModel svm;
};

BaselineModel train_baseline(const Dataset& train, const PipelineConfig& cfg) {
  cfg.validate();
  if (train.classes.size() < 2) throw DataError("training needs at least 2 classes");
  if (train.items.empty()) throw DataError("training set is empty");

  std::vector<std::vector<Descriptor>> descs(train.items.size());
  parallel_for(0, train.items.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      descs[i] = annotate_item(train, i, [&] {
        return extract_dense_sift(load_gray(train.items[i].path), cfg.step, cfg.patch_size);
      });
  });

  std::vector<Descriptor> pool;
  for (const auto& d : descs) pool.insert(pool.end(), d.begin(), d.end());
  const Matrix<double> stacked = stack_descriptors(pool, /*drop_zero=*/true);
  if (stacked.rows() < 1)
    throw DataError("baseline training: no usable descriptors in the training set");

  BaselineModel model;
  model.dict = kmeans(stacked, {.k = cfg.k_fg,
                                .seed = cfg.seed,
                                .max_iters = cfg.kmeans_max_iters,
                                .tol = cfg.kmeans_tol});
  quantize_words(model.dict);

  Matrix<double> features(static_cast<Eigen::Index>(train.items.size()), model.dict.k());
  parallel_for(0, train.items.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      features.row(static_cast<Eigen::Index>(i)) =
          bovw_encode(descs[i], model.dict).values.transpose();
  });

  std::vector<int> labels(train.items.size());
  for (std::size_t i = 0; i < train.items.size(); ++i) labels[i] = train.items[i].label;
  model.svm = train_svm(features, labels, static_cast<int>(train.classes.size()),
                        {.c = cfg.svm_c, .seed = cfg.seed});
  return model;
}

struct RunOutcome {
  double accuracy = 0.0;
  Matrix<std::int64_t> confusion;
  FallbackSummary fallbacks;
};

EvalReport run_protocol(const Dataset& ds, const PipelineConfig& cfg, bool baseline,
                        std::vector<FeatureDumpRow>* dump) {
  cfg.validate();

  EvalReport report;
  report.classes = ds.classes;
  report.baseline = baseline;
  report.zero_test_classes = flag_zero_test_classes(ds, cfg.train_ratio);
  const auto n_classes = static_cast<Eigen::Index>(ds.classes.size());

  for (int run = 1; run <= cfg.runs; ++run) {
    try {
      const auto [train_ds, test_ds] =
          stratified_split(ds, cfg.train_ratio, cfg.seed + static_cast<std::uint64_t>(run));
      if (test_ds.items.empty())
        throw DataError("no test items at ratio " + std::to_string(cfg.train_ratio) +
                        "; every class is too small");

      RunOutcome outcome;
      outcome.confusion = Matrix<std::int64_t>::Zero(n_classes, n_classes);

      std::vector<int> predicted(test_ds.items.size());
      std::vector<Fallback> test_fallbacks(test_ds.items.size(), Fallback::none);

      if (baseline) {
        const BaselineModel model = train_baseline(train_ds, cfg);
        parallel_for(0, test_ds.items.size(), [&](std::size_t lo, std::size_t hi) {
          for (std::size_t i = lo; i < hi; ++i)
            predicted[i] = annotate_item(test_ds, i, [&] {
              const auto descs = extract_dense_sift(load_gray(test_ds.items[i].path),
                                                    cfg.step, cfg.patch_size);
              return predict(model.svm, bovw_encode(descs, model.dict).values);
            });
        });
        if (dump && run == cfg.runs) {
          dump->resize(ds.items.size());
          parallel_for(0, ds.items.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
              const auto descs = extract_dense_sift(load_gray(ds.items[i].path), cfg.step,
                                                    cfg.patch_size);
              (*dump)[i] = {ds.classes[static_cast<std::size_t>(ds.items[i].label)],
                            bovw_encode(descs, model.dict).values};
            }
          });
        }
      } else {
        const TrainedModel model = train_pipeline(train_ds, cfg);
        outcome.fallbacks = model.fallbacks;
        const VisualDictionary enc = encode_dictionary(model);
        parallel_for(0, test_ds.items.size(), [&](std::size_t lo, std::size_t hi) {
          for (std::size_t i = lo; i < hi; ++i) {
            const EncodeOutcome out = annotate_item(test_ds, i, [&] {
              return encode_partitioned(
                  extract_partitioned(load_gray(test_ds.items[i].path), cfg), model.dicts,
                  enc);
            });
            predicted[i] = predict(model.svm, out.bow.values);
            test_fallbacks[i] = out.diag.fallback;
          }
        });
        if (dump && run == cfg.runs) {
          dump->resize(ds.items.size());
          parallel_for(0, ds.items.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
              const EncodeOutcome out = encode_partitioned(
                  extract_partitioned(load_gray(ds.items[i].path), cfg), model.dicts, enc);
              (*dump)[i] = {ds.classes[static_cast<std::size_t>(ds.items[i].label)],
                            out.bow.values};
            }
          });
        }
      }

      std::int64_t hits = 0;
      for (std::size_t i = 0; i < test_ds.items.size(); ++i) {
        outcome.confusion(test_ds.items[i].label, predicted[i]) += 1;
        hits += predicted[i] == test_ds.items[i].label;
      }
      outcome.accuracy = percent(hits, static_cast<std::int64_t>(test_ds.items.size()));
      outcome.fallbacks.images += static_cast<std::int64_t>(test_ds.items.size());
      for (const Fallback f : test_fallbacks) {
        outcome.fallbacks.filter_empty += f == Fallback::filter_empty;
        outcome.fallbacks.fg_empty += f == Fallback::fg_empty;
      }

      report.run_accuracy.push_back(outcome.accuracy);
      report.fallbacks.images += outcome.fallbacks.images;
      report.fallbacks.filter_empty += outcome.fallbacks.filter_empty;
      report.fallbacks.fg_empty += outcome.fallbacks.fg_empty;
      if (run == cfg.runs) report.confusion = std::move(outcome.confusion);
    } catch (const DataError& e) {
      throw DataError("run " + std::to_string(run) + ": " + e.what());
    }
  }

  double mean = 0.0;
  for (const double a : report.run_accuracy) mean += a;
  mean /= static_cast<double>(report.run_accuracy.size());
  double var = 0.0;
  for (const double a : report.run_accuracy) var += (a - mean) * (a - mean);
  var /= static_cast<double>(report.run_accuracy.size());
  report.mean_accuracy = mean;
  report.stddev_accuracy = std::sqrt(var);
  return report;
}

}  // namespace

EvalReport evaluate(const Dataset& ds, const PipelineConfig& cfg,
                    std::vector<FeatureDumpRow>* dump) {
  return run_protocol(ds, cfg, /*baseline=*/false, dump);
}

EvalReport evaluate_baseline(const Dataset& ds, const PipelineConfig& cfg,
                             std::vector<FeatureDumpRow>* dump) {
  return run_protocol(ds, cfg, /*baseline=*/true, dump);
}

bool models_equal(const TrainedModel& a, const TrainedModel& b) {
  const auto same = [](const Matrix<double>& x, const Matrix<double>& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() &&
           (x.array() == y.array()).all();
  };
  return a.config == b.config && a.classes == b.classes &&
         same(a.dicts.fg.words, b.dicts.fg.words) &&
         same(a.dicts.bg.words, b.dicts.bg.words) && same(a.svm.weights, b.svm.weights) &&
         a.svm.c == b.svm.c && a.fallbacks == b.fallbacks;
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os << (baseline ? "baseline (dSIFT+BoVW) evaluation" : "SAKF evaluation") << "\n";
  for (std::size_t i = 0; i < run_accuracy.size(); ++i)
    os << "run " << (i + 1) << ": " << format_pct(run_accuracy[i]) << "%\n";
  os << "mean accuracy: " << format_pct(mean_accuracy) << "%  (stddev "
     << format_pct(stddev_accuracy) << ")\n";

  os << "confusion matrix (final run), rows = true class:\n";
  os << std::setw(14) << " ";
  for (const auto& c : classes) os << std::setw(12) << c;
  os << "\n";
  for (Eigen::Index r = 0; r < confusion.rows(); ++r) {
    os << std::setw(14) << classes[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < confusion.cols(); ++c) os << std::setw(12) << confusion(r, c);
    os << "\n";
  }

  os << "fallbacks: images=" << fallbacks.images << " filter_empty=" << fallbacks.filter_empty
     << " fg_empty=" << fallbacks.fg_empty << "\n";
  if (!zero_test_classes.empty()) {
    os << "classes with no test items at this ratio:";
    for (const auto& c : zero_test_classes) os << " " << c;
    os << "\n";
  }
  return os.str();
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "run,accuracy\n";
  for (std::size_t i = 0; i < run_accuracy.size(); ++i)
    os << (i + 1) << "," << run_accuracy[i] << "\n";
  os << "mean," << mean_accuracy << "\n";
  os << "stddev," << stddev_accuracy << "\n\n";
  os << "confusion";
  for (const auto& c : classes) os << "," << c;
  os << "\n";
  for (Eigen::Index r = 0; r < confusion.rows(); ++r) {
    os << classes[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < confusion.cols(); ++c) os << "," << confusion(r, c);
    os << "\n";
  }
  return os.str();
}

}  // namespace sakf
