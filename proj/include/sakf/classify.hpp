#pragma once

#include <cstdint>
#include <vector>

#include "sakf/types.hpp"

namespace sakf {

// One-vs-rest linear SVM. Row c of `weights` scores class c: the first
// dim components dot the feature vector, the last one is the bias (learned
// through an augmented constant feature of value 1, so it is regularized).
// Row order matches the owning model's label table.
struct LinearSVMModel {
  Matrix<double> weights;  // n_classes x (dim + 1)
  double c = 1.0;          // regularization parameter used at training time

  int n_classes() const { return static_cast<int>(weights.rows()); }
  int dim() const { return static_cast<int>(weights.cols()) - 1; }
};

struct SvmTrainOptions {
  double c = 1.0;
  std::uint64_t seed = 0;
  int max_epochs = 1000;
  double tol = 1e-3;  // stop when the duality gap falls to tol * max(1, |primal|)
};

struct SvmTrainStats {
  // Dual objective after every epoch, per class; non-increasing by
  // construction of the coordinate steps.
  std::vector<std::vector<double>> epoch_objective;
};

// Trains one L2-regularized hinge-loss binary problem per class (class vs
// rest) by dual coordinate descent with a seeded visiting order. The duality
// gap bounds the primal suboptimality, so the tol contract holds at exit.
// Deterministic given (features, labels, options).
LinearSVMModel train_svm(const Matrix<double>& features, const std::vector<int>& labels,
                         int n_classes, const SvmTrainOptions& opts,
                         SvmTrainStats* stats = nullptr);

// Per-class decision scores w.x + b for one feature vector.
Vector<double> decision_scores(const LinearSVMModel& model, const Vector<double>& x);

// Argmax of decision_scores; ties go to the earlier class.
int predict(const LinearSVMModel& model, const Vector<double>& x,
            Vector<double>* scores = nullptr);

}  // namespace sakf
