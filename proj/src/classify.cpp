#include "sakf/classify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "sakf/parallel.hpp"

namespace sakf {

namespace {

// Hsieh-style dual coordinate descent for the binary L1-loss SVM
//   min_a  0.5 a^T Q a - e^T a,  0 <= a_i <= C,  Q_ij = y_i y_j x_i.x_j
// over bias-augmented rows of `x`. Returns the weight vector.
Vector<double> solve_binary(const Matrix<double>& x, const std::vector<signed char>& y,
                            double c, std::uint64_t seed, int max_epochs, double tol,
                            std::vector<double>* objective_trace) {
  const Eigen::Index n = x.rows(), dim = x.cols();
  Vector<double> w = Vector<double>::Zero(dim);
  Vector<double> alpha = Vector<double>::Zero(n);

  Vector<double> q_diag(n);
  for (Eigen::Index i = 0; i < n; ++i) q_diag(i) = x.row(i).squaredNorm();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::mt19937_64 rng(seed);

  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i)
      std::swap(order[i], order[rng() % (i + 1)]);

    for (const Eigen::Index i : order) {
      if (q_diag(i) <= 0.0) continue;
      const double yi = y[static_cast<std::size_t>(i)];
      const double g = yi * w.dot(x.row(i)) - 1.0;

      double pg = g;
      if (alpha(i) <= 0.0)
        pg = std::min(g, 0.0);
      else if (alpha(i) >= c)
        pg = std::max(g, 0.0);
      if (std::abs(pg) <= 1e-12) continue;

      const double old = alpha(i);
      alpha(i) = std::clamp(old - g / q_diag(i), 0.0, c);
      w += (alpha(i) - old) * yi * x.row(i).transpose();
    }

    const double w_sq = w.squaredNorm();
    const double dual = 0.5 * w_sq - alpha.sum();
    if (objective_trace) objective_trace->push_back(dual);

    double hinge = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      hinge += std::max(0.0, 1.0 - double(y[static_cast<std::size_t>(i)]) * w.dot(x.row(i)));
    const double primal = 0.5 * w_sq + c * hinge;
    const double gap = primal + dual;  // primal - (-dual) = duality gap
    if (gap <= tol * std::max(1.0, std::abs(primal))) break;
  }
  return w;
}

}  // namespace

LinearSVMModel train_svm(const Matrix<double>& features, const std::vector<int>& labels,
                         int n_classes, const SvmTrainOptions& opts, SvmTrainStats* stats) {
  if (!(opts.c > 0)) throw ValidationError("train_svm: C must be > 0");
  if (n_classes < 2) throw ValidationError("train_svm: need at least 2 classes");
  if (features.rows() < 2 || static_cast<std::size_t>(features.rows()) != labels.size())
    throw ValidationError("train_svm: need >= 2 samples with one label each");
  for (const int l : labels)
    if (l < 0 || l >= n_classes) throw ValidationError("train_svm: label out of range");
  if (std::set<int>(labels.begin(), labels.end()).size() < 2)
    throw ValidationError("train_svm: only a single class present");

  const Eigen::Index n = features.rows(), dim = features.cols();
  Matrix<double> augmented(n, dim + 1);
  augmented.leftCols(dim) = features;
  augmented.col(dim).setOnes();

  LinearSVMModel model;
  model.c = opts.c;
  model.weights.resize(n_classes, dim + 1);
  if (stats) stats->epoch_objective.assign(static_cast<std::size_t>(n_classes), {});

  // The per-class binary problems are independent; each derives its own seed.
  parallel_for(0, static_cast<std::size_t>(n_classes), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t cls = lo; cls < hi; ++cls) {
      std::vector<signed char> y(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i)
        y[static_cast<std::size_t>(i)] =
            labels[static_cast<std::size_t>(i)] == static_cast<int>(cls) ? 1 : -1;
      std::vector<double>* trace = stats ? &stats->epoch_objective[cls] : nullptr;
      model.weights.row(static_cast<Eigen::Index>(cls)) =
          solve_binary(augmented, y, opts.c, opts.seed + cls, opts.max_epochs, opts.tol, trace)
              .transpose();
    }
  });
  return model;
}

Vector<double> decision_scores(const LinearSVMModel& model, const Vector<double>& x) {
  if (x.size() + 1 != model.weights.cols())
    throw ValidationError("decision_scores: feature dimension mismatch");
  Vector<double> augmented(x.size() + 1);
  augmented.head(x.size()) = x;
  augmented(x.size()) = 1.0;
  return model.weights * augmented;
}

int predict(const LinearSVMModel& model, const Vector<double>& x, Vector<double>* scores) {
  const Vector<double> s = decision_scores(model, x);
  int best = 0;
  for (int c2 = 1; c2 < model.n_classes(); ++c2)
    if (s(c2) > s(best)) best = c2;
  if (scores) *scores = s;
  return best;
}

}  // namespace sakf
