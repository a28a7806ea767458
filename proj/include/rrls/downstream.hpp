#pragma once

#include <cstdint>
#include <vector>

#include "rrls/common.hpp"
#include "rrls/data_io.hpp"
#include "rrls/kernels.hpp"
#include "rrls/nystrom.hpp"

namespace rrls {

/// Kernel ridge regression on a Nystrom approximation.
struct KRRModel {
  Vector alpha;               // (K~ + lambda I)^{-1} y
  Vector predictor_weights;   // Winv C^T alpha, length s
  std::vector<Index> landmark_indices;
  double lambda = 0.0;
  KernelSpec kernel;
};

/// Solves (K~ + lambda I) alpha = y through an s x s system:
/// alpha = (y - G (G^T G + lambda I)^{-1} G^T y) / lambda with G G^T = K~.
KRRModel krr_fit(const KernelSpec& spec, const NystromFactors& factors, const Vector& y, double lambda);

/// Prediction at a new point: s kernel evaluations against the landmarks.
double krr_predict(const KRRModel& model, const Dataset& data, std::span<const double> x_new,
                   EvalCounter& counter);

/// Predictions for every row of `points`; s kernel evaluations per row.
Vector krr_predict_batch(const KRRModel& model, const Dataset& data, const RowMatrix& points,
                         EvalCounter& counter);

/// K~ alpha evaluated as C * predictor_weights.
Vector krr_fitted(const KRRModel& model, const NystromFactors& factors);

struct KMeansResult {
  std::vector<Index> assignment;
  double objective = 0.0;
  /// Objective after each assignment step of the winning restart.
  std::vector<double> history;
};

/// Lloyd iterations from D^2-weighted seeding; best of `restarts` runs.
KMeansResult kmeans_on_features(const Matrix& features, Index k, std::size_t restarts = 3,
                                std::size_t iterations = 100, std::uint64_t seed = 0);

/// Sum of squared distances of rows to their cluster means.
double kmeans_objective(const Matrix& features, const std::vector<Index>& assignment, Index k);

struct KPCAResult {
  Matrix components;  // s x k, orthonormal columns
  double captured = 0.0;
  Vector singular_values;
};

/// Top-k right singular directions of the feature matrix.
KPCAResult kpca_on_features(const Matrix& features, Index k);

}  // namespace rrls
