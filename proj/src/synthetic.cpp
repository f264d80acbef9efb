#include "sakf/synthetic.hpp"

#include <array>
#include <cmath>
#include <random>
#include <string>

#include "sakf/image_io.hpp"
#include "sakf/imgproc.hpp"

namespace sakf {

namespace fs = std::filesystem;

namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double range(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }

enum class Shape { disc, box, wedge };

bool inside(Shape s, double cx, double cy, double r, int x, int y) {
  const double dx = x - cx, dy = y - cy;
  switch (s) {
    case Shape::disc:
      return dx * dx + dy * dy <= r * r;
    case Shape::box:
      return std::abs(dx) <= r && std::abs(dy) <= r;
    case Shape::wedge:  // isoceles triangle pointing up
      return dy >= -r && dy <= r && std::abs(dx) <= (dy + r) * 0.5;
  }
  return false;
}

Matrix<std::uint8_t> render(Shape shape, int n, std::mt19937_64& rng) {
  // Dark textured background: oriented stripes at a random angle and period
  // plus speckle. The clutter varies image to image but carries no class
  // signal, which is exactly the kind of distraction the filter is meant to
  // discard.
  const double stripe_angle = range(rng, 0.0, EIGEN_PI);
  const double stripe_period = range(rng, 6.0, 14.0);
  const double ca = std::cos(stripe_angle), sa = std::sin(stripe_angle);
  GrayImage img(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      img(y, x) = 38.0 + 26.0 * std::sin(2.0 * EIGEN_PI * (ca * x + sa * y) / stripe_period) +
                  range(rng, -12.0, 12.0);
  img = img.cwiseMax(0.0);
  img = gaussian_blur(img, 1.0);

  const double r = range(rng, 0.18, 0.27) * n;
  const double cx = range(rng, r + 4, n - r - 4);
  const double cy = range(rng, r + 4, n - r - 4);
  const double brightness = range(rng, 175.0, 225.0);

  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      if (inside(shape, cx, cy, r, x, y))
        img(y, x) = std::clamp(brightness + range(rng, -20.0, 20.0), 0.0, 255.0);

  Matrix<std::uint8_t> out(n, n);
  for (Eigen::Index i = 0; i < img.size(); ++i)
    out.data()[i] = static_cast<std::uint8_t>(std::lround(img.data()[i]));
  return out;
}

}  // namespace

void write_synthetic_dataset(const fs::path& root, const SyntheticOptions& opts) {
  if (opts.images_per_class < 1) throw ValidationError("images_per_class must be >= 1");
  if (opts.image_size < 16) throw ValidationError("image_size must be >= 16");

  const std::array<std::pair<const char*, Shape>, 3> classes = {{
      {"box", Shape::box},
      {"disc", Shape::disc},
      {"wedge", Shape::wedge},
  }};

  for (std::size_t c = 0; c < classes.size(); ++c) {
    const fs::path dir = root / classes[c].first;
    fs::create_directories(dir);
    for (int i = 0; i < opts.images_per_class; ++i) {
      std::mt19937_64 rng(opts.seed * 1000003ULL + c * 4099ULL + static_cast<std::uint64_t>(i));
      char name[32];
      std::snprintf(name, sizeof(name), "%s_%03d.png", classes[c].first, i);
      save_png_gray8(dir / name, render(classes[c].second, opts.image_size, rng));
    }
  }
}

}  // namespace sakf
