#include <CLI11.hpp>
#include <iostream>

#include "sakf/synthetic.hpp"

// Generates the bright-shapes-on-dark-noise demo dataset so the main CLI can
// be exercised without real data.
int main(int argc, char** argv) {
  CLI::App app{"generate a synthetic shapes dataset (disc / box / wedge)"};

  std::string out;
  sakf::SyntheticOptions opts;
  app.add_option("--out", out, "output dataset root")->required();
  app.add_option("--images-per-class", opts.images_per_class, "images per class");
  app.add_option("--size", opts.image_size, "square image side in pixels");
  app.add_option("--seed", opts.seed, "generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    sakf::write_synthetic_dataset(out, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cout << "wrote 3 x " << opts.images_per_class << " images under " << out << "\n";
  return 0;
}
