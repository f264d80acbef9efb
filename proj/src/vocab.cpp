#include "sakf/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "sakf/parallel.hpp"

namespace sakf {

namespace {

constexpr std::size_t kAssignChunk = 256;  // fixed so results ignore thread count

double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// k-means++: first center uniform, the rest sampled proportional to the
// squared distance from the nearest already-chosen center. Stops early once
// every remaining point coincides with a center (fewer distinct points than k).
Matrix<double> kmeanspp_init(const Matrix<double>& pts, int k, std::uint64_t seed) {
  const Eigen::Index n = pts.rows(), d = pts.cols();
  std::mt19937_64 rng(seed);

  Matrix<double> centers(k, d);
  int chosen = 0;

  const Eigen::Index first = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
  centers.row(chosen++) = pts.row(first);

  // Distances by explicit subtraction: a point equal to a chosen center must
  // contribute exactly zero mass, or duplicate points would keep getting
  // sampled and the distinct-point cutoff below would never trigger.
  Vector<double> dist2 = (pts.rowwise() - pts.row(first)).rowwise().squaredNorm();

  while (chosen < k) {
    const double total = dist2.sum();
    if (!(total > 0.0)) break;  // every point already sits on a center
    const double r = unit_double(rng) * total;
    Eigen::Index pick = n - 1;
    double cum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      cum += dist2(i);
      if (cum > r) {
        pick = i;
        break;
      }
    }
    centers.row(chosen) = pts.row(pick);
    const Vector<double> cand = (pts.rowwise() - pts.row(pick)).rowwise().squaredNorm();
    dist2 = dist2.cwiseMin(cand);
    ++chosen;
  }
  return centers.topRows(chosen);
}

}  // namespace

VisualDictionary kmeans(const Matrix<double>& points, const KMeansOptions& opts,
                        KMeansStats* stats) {
  if (points.rows() < 1) throw ValidationError("kmeans: empty descriptor set");
  if (opts.k < 1) throw ValidationError("kmeans: k must be >= 1");

  const Eigen::Index n = points.rows(), d = points.cols();
  Matrix<double> centers = kmeanspp_init(points, opts.k, opts.seed);
  const int k = static_cast<int>(centers.rows());

  std::vector<int> assignment(static_cast<std::size_t>(n), 0);
  std::vector<double> best_dist2(static_cast<std::size_t>(n), 0.0);

  KMeansStats local;
  KMeansStats& st = stats ? *stats : local;
  st = {};
  st.effective_k = k;

  const std::size_t n_chunks = (static_cast<std::size_t>(n) + kAssignChunk - 1) / kAssignChunk;
  std::vector<double> chunk_inertia(n_chunks, 0.0);

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    // Assignment: blocked GEMM against the center matrix, argmin per row.
    const Vector<double> c_sq = centers.rowwise().squaredNorm();
    parallel_for(
        0, static_cast<std::size_t>(n),
        [&](std::size_t lo, std::size_t hi) {
          const Eigen::Index rows = static_cast<Eigen::Index>(hi - lo);
          const Matrix<double> scores =
              points.middleRows(static_cast<Eigen::Index>(lo), rows) * centers.transpose();
          double acc = 0.0;
          for (Eigen::Index r = 0; r < rows; ++r) {
            int best = 0;
            double best_val = c_sq(0) - 2.0 * scores(r, 0);
            for (int j = 1; j < k; ++j) {
              const double val = c_sq(j) - 2.0 * scores(r, j);
              if (val < best_val) {
                best_val = val;
                best = j;
              }
            }
            const std::size_t idx = lo + static_cast<std::size_t>(r);
            const auto row = static_cast<Eigen::Index>(idx);
            assignment[idx] = best;
            // exact distance to the chosen center; the GEMM expansion above
            // is only used to pick it
            best_dist2[idx] = (points.row(row) - centers.row(best)).squaredNorm();
            acc += best_dist2[idx];
          }
          chunk_inertia[lo / kAssignChunk] = acc;
        },
        kAssignChunk);

    double inertia = 0.0;
    for (const double v : chunk_inertia) inertia += v;
    st.inertia.push_back(inertia);
    st.iterations = iter + 1;

    // Update: cluster means, accumulated in ascending point order.
    Matrix<double> sums = Matrix<double>::Zero(k, d);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assignment[static_cast<std::size_t>(i)]) += points.row(i);
      counts[static_cast<std::size_t>(assignment[i])] += 1;
    }

    Matrix<double> next = centers;
    for (int j = 0; j < k; ++j)
      if (counts[static_cast<std::size_t>(j)] > 0)
        next.row(j) = sums.row(j) / static_cast<double>(counts[static_cast<std::size_t>(j)]);

    // Reseed empty clusters to the point farthest from its assigned center,
    // never draining a cluster below one member.
    for (int j = 0; j < k; ++j) {
      if (counts[static_cast<std::size_t>(j)] > 0) continue;
      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int owner = assignment[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(owner)] <= 1) continue;
        if (best_dist2[static_cast<std::size_t>(i)] > far_d) {
          far_d = best_dist2[static_cast<std::size_t>(i)];
          far = i;
        }
      }
      if (far < 0) continue;  // nothing to steal; keep the stale center
      const int owner = assignment[static_cast<std::size_t>(far)];
      counts[static_cast<std::size_t>(owner)] -= 1;
      counts[static_cast<std::size_t>(j)] += 1;
      assignment[static_cast<std::size_t>(far)] = j;
      best_dist2[static_cast<std::size_t>(far)] = 0.0;
      next.row(j) = points.row(far);
    }

    double movement = 0.0;
    for (int j = 0; j < k; ++j)
      movement = std::max(movement, (next.row(j) - centers.row(j)).norm());
    centers = std::move(next);
    if (movement < opts.tol) break;
  }

  return VisualDictionary{std::move(centers)};
}

int assign(const DescriptorValues& d, const VisualDictionary& dict) {
  if (dict.k() < 1) throw ValidationError("assign: empty dictionary");
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int j = 0; j < dict.k(); ++j) {
    const double d2 = (dict.words.row(j).transpose() - d).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = j;
    }
  }
  return best;
}

double min_distance(const DescriptorValues& d, const VisualDictionary& dict) {
  if (dict.k() < 1) throw ValidationError("min_distance: empty dictionary");
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int j = 0; j < dict.k(); ++j)
    best_d2 = std::min(best_d2, (dict.words.row(j).transpose() - d).squaredNorm());
  return std::sqrt(best_d2);
}

Matrix<double> stack_descriptors(std::span<const Descriptor> descs, bool drop_zero) {
  Eigen::Index rows = 0;
  for (const auto& d : descs)
    if (!drop_zero || !d.values.isZero(0.0)) ++rows;
  Matrix<double> out(rows, kDescriptorDim);
  Eigen::Index r = 0;
  for (const auto& d : descs)
    if (!drop_zero || !d.values.isZero(0.0)) out.row(r++) = d.values.transpose();
  return out;
}

}  // namespace sakf
