#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "sakf/parallel.hpp"
#include "sakf/vocab.hpp"

using sakf::Descriptor;
using sakf::DescriptorValues;
using sakf::KMeansOptions;
using sakf::KMeansStats;
using sakf::Matrix;
using sakf::VisualDictionary;

namespace {

Matrix<double> random_points(Eigen::Index n, std::mt19937_64& rng) {
  return oracles::rand_matrix(n, sakf::kDescriptorDim, 0.0, 0.2, rng);
}

VisualDictionary random_dictionary(int k, std::mt19937_64& rng) {
  return VisualDictionary{random_points(k, rng)};
}

}  // namespace

TEST_CASE("kmeans with k = n returns the input points with zero inertia") {
  std::mt19937_64 rng(41);
  const Matrix<double> pts = random_points(12, rng);
  KMeansStats stats;
  const VisualDictionary dict = sakf::kmeans(pts, {.k = 12, .seed = 5}, &stats);
  REQUIRE(dict.k() == 12);

  // every point coincides with exactly one center
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const DescriptorValues d = pts.row(i).transpose();
    CHECK(sakf::min_distance(d, dict) == 0.0);
  }
  CHECK(stats.inertia.back() == 0.0);
}

TEST_CASE("kmeans lowers k to the number of distinct points") {
  Matrix<double> pts(5, sakf::kDescriptorDim);
  std::mt19937_64 rng(42);
  const Matrix<double> two = random_points(2, rng);
  pts.row(0) = two.row(0);
  pts.row(1) = two.row(1);
  pts.row(2) = two.row(0);
  pts.row(3) = two.row(1);
  pts.row(4) = two.row(0);

  KMeansStats stats;
  const VisualDictionary dict = sakf::kmeans(pts, {.k = 9, .seed = 1}, &stats);
  CHECK(dict.k() == 2);
  CHECK(stats.effective_k == 2);
  CHECK(stats.inertia.back() == 0.0);
}

TEST_CASE("kmeans separates two well-spread blobs") {
  std::mt19937_64 rng(43);
  DescriptorValues mean_a, mean_b;
  for (int i = 0; i < sakf::kDescriptorDim; ++i) {
    mean_a(i) = oracles::unit(rng);
    mean_b(i) = mean_a(i) + 10.0 / std::sqrt(static_cast<double>(sakf::kDescriptorDim));
  }
  Matrix<double> pts(60, sakf::kDescriptorDim);
  for (int i = 0; i < 60; ++i) {
    const DescriptorValues& mean = i < 30 ? mean_a : mean_b;
    for (int j = 0; j < sakf::kDescriptorDim; ++j)
      pts(i, j) = mean(j) + (oracles::unit(rng) - 0.5) * 0.2 / 8.0;
  }

  const VisualDictionary dict = sakf::kmeans(pts, {.k = 2, .seed = 7});
  REQUIRE(dict.k() == 2);
  CHECK(std::min((dict.words.row(0).transpose() - mean_a).norm(),
                 (dict.words.row(1).transpose() - mean_a).norm()) < 0.2);
  CHECK(std::min((dict.words.row(0).transpose() - mean_b).norm(),
                 (dict.words.row(1).transpose() - mean_b).norm()) < 0.2);

  // every point's nearest center belongs to its generating blob
  for (int i = 0; i < 60; ++i) {
    const DescriptorValues d = pts.row(i).transpose();
    const int closest = sakf::assign(d, dict);
    const DescriptorValues& mean = i < 30 ? mean_a : mean_b;
    const int blob_center =
        (dict.words.row(0).transpose() - mean).norm() < (dict.words.row(1).transpose() - mean).norm()
            ? 0
            : 1;
    CHECK(closest == blob_center);
  }
}

TEST_CASE("kmeans inertia never increases across Lloyd iterations") {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 6; ++trial) {
    const auto n = static_cast<Eigen::Index>(40 + rng() % 200);
    const int k = 3 + static_cast<int>(rng() % 12);
    KMeansStats stats;
    sakf::kmeans(random_points(n, rng), {.k = k, .seed = rng()}, &stats);
    REQUIRE(!stats.inertia.empty());
    for (std::size_t i = 1; i < stats.inertia.size(); ++i)
      CHECK(stats.inertia[i] <= stats.inertia[i - 1] * (1.0 + 1e-12) + 1e-12);
    CHECK(stats.inertia.back() <= stats.inertia.front() * (1.0 + 1e-12) + 1e-12);
  }
}

TEST_CASE("kmeans is bit-deterministic, independent of thread count") {
  std::mt19937_64 rng(45);
  const Matrix<double> pts = random_points(700, rng);
  const KMeansOptions opts{.k = 24, .seed = 99};

  const VisualDictionary a = sakf::kmeans(pts, opts);
  const VisualDictionary b = sakf::kmeans(pts, opts);
  CHECK((a.words.array() == b.words.array()).all());

  sakf::set_thread_count(1);
  const VisualDictionary serial = sakf::kmeans(pts, opts);
  sakf::set_thread_count(0);
  CHECK((a.words.array() == serial.words.array()).all());
}

TEST_CASE("kmeans rejects an empty descriptor set") {
  const Matrix<double> empty(0, sakf::kDescriptorDim);
  CHECK_THROWS_AS(sakf::kmeans(empty, {.k = 2}), sakf::ValidationError);
}

TEST_CASE("assign and min_distance basics") {
  std::mt19937_64 rng(46);
  const VisualDictionary dict = random_dictionary(8, rng);

  for (int j = 0; j < 8; ++j) {
    const DescriptorValues d = dict.words.row(j).transpose();
    CHECK(sakf::assign(d, dict) == j);
    CHECK(sakf::min_distance(d, dict) == 0.0);
  }

  // two identical words tie toward index 0
  VisualDictionary twins;
  twins.words.resize(2, sakf::kDescriptorDim);
  twins.words.row(0) = dict.words.row(3);
  twins.words.row(1) = dict.words.row(3);
  CHECK(sakf::assign(oracles::rand_descriptor(rng), twins) == 0);

  // singleton dictionary distance is the plain norm
  VisualDictionary single;
  single.words = dict.words.topRows(1);
  const DescriptorValues d = oracles::rand_descriptor(rng);
  CHECK(sakf::min_distance(d, single) ==
        doctest::Approx((d - single.words.row(0).transpose()).norm()).epsilon(1e-12));
}

TEST_CASE("assign and min_distance match the exhaustive scan") {
  std::mt19937_64 rng(47);
  const VisualDictionary dict = random_dictionary(64, rng);
  for (int trial = 0; trial < 300; ++trial) {
    const DescriptorValues d = oracles::rand_descriptor(rng);
    double want_dist = 0.0;
    const int want = oracles::brute_assign(d, dict, &want_dist);
    CHECK(sakf::assign(d, dict) == want);
    CHECK(sakf::min_distance(d, dict) == doctest::Approx(want_dist).epsilon(1e-9));
  }
}

TEST_CASE("stack_descriptors optionally drops all-zero descriptors") {
  std::mt19937_64 rng(48);
  std::vector<Descriptor> descs(5);
  descs[1].values = oracles::rand_descriptor(rng);
  descs[3].values = oracles::rand_descriptor(rng);

  CHECK(sakf::stack_descriptors(descs, false).rows() == 5);
  const Matrix<double> kept = sakf::stack_descriptors(descs, true);
  REQUIRE(kept.rows() == 2);
  CHECK((kept.row(0).transpose().array() == descs[1].values.array()).all());
  CHECK((kept.row(1).transpose().array() == descs[3].values.array()).all());
}
