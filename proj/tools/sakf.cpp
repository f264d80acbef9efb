#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "sakf/features.hpp"
#include "sakf/image_io.hpp"
#include "sakf/imgproc.hpp"
#include "sakf/parallel.hpp"
#include "sakf/persistence.hpp"
#include "sakf/pipeline.hpp"
#include "sakf/saliency.hpp"

namespace fs = std::filesystem;

namespace {

struct CliOptions {
  sakf::PipelineConfig config;
  std::string encode_dict = "fg";
  int threads = 0;
};

void add_config_flags(CLI::App* cmd, CliOptions& opts) {
  cmd->add_option("--step", opts.config.step, "dense grid stride in pixels");
  cmd->add_option("--patch-size", opts.config.patch_size, "dense patch side in pixels");
  cmd->add_option("--k-fg", opts.config.k_fg, "foreground dictionary size");
  cmd->add_option("--k-bg", opts.config.k_bg, "background dictionary size");
  cmd->add_option("--sigma", opts.config.sigma, "saliency blurring factor");
  cmd->add_option("--working-width", opts.config.working_width, "saliency working grid width");
  cmd->add_option("--svm-c", opts.config.svm_c, "SVM regularization parameter");
  cmd->add_option("--seed", opts.config.seed, "master random seed");
  cmd->add_option("--train-ratio", opts.config.train_ratio, "training fraction per class");
  cmd->add_option("--runs", opts.config.runs, "number of evaluation repetitions");
  cmd->add_option("--encode-dict", opts.encode_dict,
                  "dictionary the histogram is built over: fg or combined");
  cmd->add_option("--kmeans-max-iters", opts.config.kmeans_max_iters, "k-means iteration cap");
  cmd->add_option("--kmeans-tol", opts.config.kmeans_tol, "k-means movement tolerance");
}

std::string config_header(const sakf::PipelineConfig& c, int threads) {
  std::ostringstream os;
  os << "config: step=" << c.step << " patch_size=" << c.patch_size << " k_fg=" << c.k_fg
     << " k_bg=" << c.k_bg << " sigma=" << c.sigma << " working_width=" << c.working_width
     << " svm_c=" << c.svm_c << " seed=" << c.seed << " train_ratio=" << c.train_ratio
     << " runs=" << c.runs << " encode_dict=" << sakf::to_string(c.encode_dict)
     << " kmeans_max_iters=" << c.kmeans_max_iters << " kmeans_tol=" << c.kmeans_tol
     << " threads=" << threads;
  return os.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw sakf::DataError("cannot write " + path.string());
  out << text;
  if (!out.good()) throw sakf::DataError("short write to " + path.string());
}

void write_feature_csv(const fs::path& path, const std::vector<sakf::FeatureDumpRow>& rows) {
  std::ofstream out(path);
  if (!out) throw sakf::DataError("cannot write " + path.string());
  out << std::setprecision(17);
  for (const auto& row : rows) {
    out << row.label;
    for (Eigen::Index i = 0; i < row.values.size(); ++i) out << "," << row.values(i);
    out << "\n";
  }
  if (!out.good()) throw sakf::DataError("short write to " + path.string());
}

int run_train(const CliOptions& opts, const fs::path& data, const fs::path& out) {
  std::cout << config_header(opts.config, opts.threads) << "\n";
  const sakf::Dataset ds = sakf::load_dataset(data);
  std::cout << "dataset: " << ds.items.size() << " images, " << ds.classes.size()
            << " classes\n";
  const sakf::TrainedModel model = sakf::train_pipeline(ds, opts.config);
  sakf::save_model(model, out);
  std::cout << "dictionaries: fg k=" << model.dicts.fg.k() << ", bg k=" << model.dicts.bg.k()
            << "\n";
  std::cout << "fallbacks: images=" << model.fallbacks.images
            << " filter_empty=" << model.fallbacks.filter_empty
            << " fg_empty=" << model.fallbacks.fg_empty << "\n";
  std::cout << "model written to " << out.string() << "\n";
  return 0;
}

int run_predict(const fs::path& model_path, const fs::path& image, bool json, int threads) {
  const sakf::TrainedModel model = sakf::load_model(model_path);
  const sakf::Prediction pred = sakf::predict_image(model, image);

  if (json) {
    nlohmann::ordered_json j;
    j["label"] = pred.label_name;
    nlohmann::ordered_json scores;
    for (std::size_t c = 0; c < model.classes.size(); ++c)
      scores[model.classes[c]] = pred.scores(static_cast<Eigen::Index>(c));
    j["scores"] = scores;
    j["keypoints_total"] = pred.diagnostics.keypoints_total;
    j["keypoints_fg"] = pred.diagnostics.keypoints_fg;
    j["keypoints_kept"] = pred.diagnostics.keypoints_kept;
    j["fallback"] = sakf::to_string(pred.diagnostics.fallback);
    std::cout << j.dump() << "\n";
    return 0;
  }

  std::cout << config_header(model.config, threads) << "\n";
  std::cout << "label: " << pred.label_name << "\n";
  std::cout << "scores:";
  for (std::size_t c = 0; c < model.classes.size(); ++c)
    std::cout << " " << model.classes[c] << "="
              << pred.scores(static_cast<Eigen::Index>(c));
  std::cout << "\n";
  std::cout << "keypoints: total=" << pred.diagnostics.keypoints_total
            << " fg=" << pred.diagnostics.keypoints_fg
            << " kept=" << pred.diagnostics.keypoints_kept
            << " fallback=" << sakf::to_string(pred.diagnostics.fallback) << "\n";
  return 0;
}

int run_eval(const CliOptions& opts, const fs::path& data, bool baseline,
             const std::string& report_csv, const std::string& dump_csv) {
  std::cout << config_header(opts.config, opts.threads) << "\n";
  const sakf::Dataset ds = sakf::load_dataset(data);
  std::cout << "dataset: " << ds.items.size() << " images, " << ds.classes.size()
            << " classes\n";

  std::vector<sakf::FeatureDumpRow> dump;
  std::vector<sakf::FeatureDumpRow>* dump_ptr = dump_csv.empty() ? nullptr : &dump;
  const sakf::EvalReport report = baseline ? sakf::evaluate_baseline(ds, opts.config, dump_ptr)
                                           : sakf::evaluate(ds, opts.config, dump_ptr);
  std::cout << report.to_text();
  if (!report_csv.empty()) {
    write_text_file(report_csv, report.to_csv());
    std::cout << "report written to " << report_csv << "\n";
  }
  if (!dump_csv.empty()) {
    write_feature_csv(dump_csv, dump);
    std::cout << "features written to " << dump_csv << "\n";
  }
  return 0;
}

void draw_dot(sakf::RgbImage& img, int cx, int cy, std::uint8_t r, std::uint8_t g,
              std::uint8_t b) {
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) {
      if (dx * dx + dy * dy > 5) continue;
      const int x = cx + dx, y = cy + dy;
      if (x < 0 || y < 0 || x >= img.width || y >= img.height) continue;
      const std::size_t at = 3 * (static_cast<std::size_t>(y) * img.width + x);
      img.pixels[at] = r;
      img.pixels[at + 1] = g;
      img.pixels[at + 2] = b;
    }
  }
}

int run_inspect(const fs::path& model_path, const fs::path& image, const fs::path& out_dir,
                int threads) {
  const sakf::TrainedModel model = sakf::load_model(model_path);
  const sakf::PipelineConfig& cfg = model.config;
  std::cout << config_header(cfg, threads) << "\n";

  const sakf::GrayImage gray = sakf::to_grayscale(sakf::load_image(image));
  const sakf::SaliencyMap sm = sakf::image_signature(gray, {cfg.sigma, cfg.working_width});
  const sakf::BinaryMask mask = sakf::binarize(sm, sakf::otsu_threshold(sm));
  const auto descs = sakf::extract_dense_sift(gray, cfg.step, cfg.patch_size);
  const sakf::PartitionedDescriptors parts = sakf::partition_descriptors(descs, mask);
  const sakf::FilterResult filtered = sakf::sakf_filter(parts.foreground, model.dicts);

  fs::create_directories(out_dir);

  sakf::Matrix<std::uint8_t> sm8(sm.rows(), sm.cols());
  for (Eigen::Index i = 0; i < sm.size(); ++i)
    sm8.data()[i] = static_cast<std::uint8_t>(std::lround(sm.data()[i] * 255.0));
  sakf::save_png_gray8(out_dir / "saliency.png", sm8);

  sakf::Matrix<std::uint8_t> mask8(mask.rows(), mask.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i)
    mask8.data()[i] = mask.data()[i] ? 255 : 0;
  sakf::save_png_gray8(out_dir / "mask.png", mask8);

  // Overlay: black dots mark foreground keypoints, red dots the ones the
  // filter kept.
  sakf::RgbImage overlay;
  overlay.width = static_cast<int>(gray.cols());
  overlay.height = static_cast<int>(gray.rows());
  overlay.pixels.resize(static_cast<std::size_t>(overlay.width) * overlay.height * 3);
  for (int y = 0; y < overlay.height; ++y)
    for (int x = 0; x < overlay.width; ++x) {
      const auto v = static_cast<std::uint8_t>(std::lround(gray(y, x)));
      const std::size_t at = 3 * (static_cast<std::size_t>(y) * overlay.width + x);
      overlay.pixels[at] = overlay.pixels[at + 1] = overlay.pixels[at + 2] = v;
    }
  for (const auto& d : parts.foreground) draw_dot(overlay, d.keypoint.x, d.keypoint.y, 0, 0, 0);
  if (filtered.fallback != sakf::Fallback::fg_empty)
    for (const auto& d : filtered.kept) draw_dot(overlay, d.keypoint.x, d.keypoint.y, 220, 0, 0);
  sakf::save_png_rgb8(out_dir / "keypoints.png", overlay);

  std::cout << "keypoints: total=" << descs.size() << " fg=" << parts.foreground.size()
            << " kept=" << (filtered.fallback == sakf::Fallback::fg_empty ? 0 : filtered.kept.size())
            << " fallback=" << sakf::to_string(filtered.fallback) << "\n";
  std::cout << "wrote " << (out_dir / "saliency.png").string() << ", "
            << (out_dir / "mask.png").string() << ", "
            << (out_dir / "keypoints.png").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic attention keypoint filtering for image classification"};
  app.require_subcommand(1);

  CliOptions opts;
  std::string data_dir, model_path, image_path, out_path, out_dir;
  std::string report_csv, dump_csv;
  bool json = false;

  app.add_option("--threads", opts.threads, "worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);

  CLI::App* train = app.add_subcommand("train", "train a model on a dataset directory");
  train->add_option("--data", data_dir, "dataset root (one subdirectory per class)")
      ->required();
  train->add_option("--out", out_path, "output model file")->required();
  add_config_flags(train, opts);

  CLI::App* predict = app.add_subcommand("predict", "classify a single image");
  predict->add_option("--model", model_path, "trained model file")->required();
  predict->add_option("--image", image_path, "image to classify")->required();
  predict->add_flag("--json", json, "emit a single-line JSON object");

  CLI::App* eval = app.add_subcommand("eval", "run the split/train/test protocol");
  eval->add_option("--data", data_dir, "dataset root")->required();
  eval->add_option("--report", report_csv, "write the report as CSV");
  eval->add_option("--dump-features", dump_csv, "write final-run feature vectors as CSV");
  add_config_flags(eval, opts);

  CLI::App* eval_baseline =
      app.add_subcommand("eval-baseline", "same protocol for the plain dSIFT+BoVW baseline");
  eval_baseline->add_option("--data", data_dir, "dataset root")->required();
  eval_baseline->add_option("--report", report_csv, "write the report as CSV");
  eval_baseline->add_option("--dump-features", dump_csv, "write final-run feature vectors as CSV");
  add_config_flags(eval_baseline, opts);

  CLI::App* inspect = app.add_subcommand("inspect", "write saliency/mask/keypoint diagnostics");
  inspect->add_option("--model", model_path, "trained model file")->required();
  inspect->add_option("--image", image_path, "image to inspect")->required();
  inspect->add_option("--out-dir", out_dir, "directory for the PNG outputs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    opts.config.encode_dict = sakf::parse_encode_dict(opts.encode_dict);
    opts.config.validate();  // reject bad parameters before any work
    sakf::set_thread_count(opts.threads);

    if (train->parsed()) return run_train(opts, data_dir, out_path);
    if (predict->parsed()) return run_predict(model_path, image_path, json, opts.threads);
    if (eval->parsed()) return run_eval(opts, data_dir, false, report_csv, dump_csv);
    if (eval_baseline->parsed()) return run_eval(opts, data_dir, true, report_csv, dump_csv);
    if (inspect->parsed()) return run_inspect(model_path, image_path, out_dir, opts.threads);
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const sakf::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
