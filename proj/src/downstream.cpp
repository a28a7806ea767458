#include "rrls/downstream.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rrls/detail/cholesky.hpp"

namespace rrls {

KRRModel krr_fit(const KernelSpec& spec, const NystromFactors& factors, const Vector& y, double lambda) {
  if (!(lambda > 0.0)) throw ArgumentError("lambda must be positive");
  if (y.size() != factors.n()) throw ArgumentError("target length does not match the number of points");

  const Matrix g = factors.factor_rows();
  Matrix core = g.transpose() * g;
  core.diagonal().array() += lambda;
  const auto llt = detail::jittered_cholesky(core, lambda);

  KRRModel model;
  model.alpha = (y - g * llt.solve(g.transpose() * y)) / lambda;
  model.predictor_weights = factors.root * (factors.root * (factors.C.transpose() * model.alpha));
  model.landmark_indices = factors.landmark_indices;
  model.lambda = lambda;
  model.kernel = spec;
  return model;
}

Vector krr_predict_batch(const KRRModel& model, const Dataset& data, const RowMatrix& points,
                         EvalCounter& counter) {
  if (points.cols() != data.d()) throw ArgumentError("query dimension does not match the training data");
  return kernel_cross(model.kernel, points, data, model.landmark_indices, counter) * model.predictor_weights;
}

double krr_predict(const KRRModel& model, const Dataset& data, std::span<const double> x_new,
                   EvalCounter& counter) {
  if (static_cast<Index>(x_new.size()) != data.d()) {
    throw ArgumentError("query dimension does not match the training data");
  }
  const RowMatrix query = Eigen::Map<const RowMatrix>(x_new.data(), 1, data.d());
  return krr_predict_batch(model, data, query, counter)(0);
}

Vector krr_fitted(const KRRModel& model, const NystromFactors& factors) {
  return factors.C * model.predictor_weights;
}

namespace {

double squared_distance(const Matrix& x, Index i, const Matrix& centers, Index c) {
  return (x.row(i) - centers.row(c)).squaredNorm();
}

// Seeding: first center uniform, later centers drawn proportionally to the
// squared distance to the nearest chosen center.
Matrix seed_centers(const Matrix& x, Index k, std::mt19937_64& rng) {
  const Index n = x.rows();
  Matrix centers(k, x.cols());
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  Vector nearest = Vector::Constant(n, std::numeric_limits<double>::infinity());
  std::uniform_int_distribution<Index> first(0, n - 1);
  Index pick = first(rng);
  for (Index c = 0; c < k; ++c) {
    centers.row(c) = x.row(pick);
    chosen[static_cast<std::size_t>(pick)] = 1;
    for (Index i = 0; i < n; ++i) nearest(i) = std::min(nearest(i), squared_distance(x, i, centers, c));
    if (c + 1 == k) break;
    const double total = nearest.sum();
    if (total > 0.0) {
      double u = uniform01(rng) * total;
      pick = -1;
      for (Index i = 0; i < n; ++i) {
        if (nearest(i) <= 0.0) continue;
        pick = i;  // last positive entry absorbs rounding
        u -= nearest(i);
        if (u < 0.0) break;
      }
    } else {
      // Every remaining point coincides with a center: take any unchosen one.
      std::vector<Index> free;
      for (Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) free.push_back(i);
      }
      std::uniform_int_distribution<std::size_t> any(0, free.size() - 1);
      pick = free[any(rng)];
    }
  }
  return centers;
}

double assign(const Matrix& x, const Matrix& centers, std::vector<Index>& labels) {
  double objective = 0.0;
  for (Index i = 0; i < x.rows(); ++i) {
    Index best = 0;
    double best_d = squared_distance(x, i, centers, 0);
    for (Index c = 1; c < centers.rows(); ++c) {
      const double d = squared_distance(x, i, centers, c);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    objective += best_d;
  }
  return objective;
}

}  // namespace

double kmeans_objective(const Matrix& features, const std::vector<Index>& assignment, Index k) {
  Matrix sums = Matrix::Zero(k, features.cols());
  Vector counts = Vector::Zero(k);
  for (Index i = 0; i < features.rows(); ++i) {
    const Index c = assignment[static_cast<std::size_t>(i)];
    sums.row(c) += features.row(i);
    counts(c) += 1.0;
  }
  double objective = 0.0;
  for (Index i = 0; i < features.rows(); ++i) {
    const Index c = assignment[static_cast<std::size_t>(i)];
    objective += (features.row(i) - sums.row(c) / counts(c)).squaredNorm();
  }
  return objective;
}

KMeansResult kmeans_on_features(const Matrix& features, Index k, std::size_t restarts, std::size_t iterations,
                                std::uint64_t seed) {
  const Index n = features.rows();
  if (k < 1 || k > n) {
    throw ArgumentError("k = " + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]");
  }
  KMeansResult best;
  best.objective = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < std::max<std::size_t>(1, restarts); ++r) {
    std::mt19937_64 rng(mix_seed(seed, r));
    Matrix centers = seed_centers(features, k, rng);
    KMeansResult run;
    run.assignment.assign(static_cast<std::size_t>(n), 0);
    run.objective = assign(features, centers, run.assignment);
    run.history.push_back(run.objective);
    for (std::size_t it = 0; it < iterations; ++it) {
      Matrix sums = Matrix::Zero(k, features.cols());
      Vector counts = Vector::Zero(k);
      for (Index i = 0; i < n; ++i) {
        const Index c = run.assignment[static_cast<std::size_t>(i)];
        sums.row(c) += features.row(i);
        counts(c) += 1.0;
      }
      // Empty clusters keep their previous center.
      for (Index c = 0; c < k; ++c) {
        if (counts(c) > 0.0) centers.row(c) = sums.row(c) / counts(c);
      }
      std::vector<Index> labels(static_cast<std::size_t>(n));
      const double objective = assign(features, centers, labels);
      const bool changed = labels != run.assignment;
      run.assignment = std::move(labels);
      run.objective = objective;
      run.history.push_back(objective);
      if (!changed) break;
    }
    if (run.objective < best.objective) best = std::move(run);
  }
  return best;
}

KPCAResult kpca_on_features(const Matrix& features, Index k) {
  if (k < 1) throw ArgumentError("k must be >= 1");
  const Eigen::BDCSVD<Matrix> svd(features, Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double top = sv.size() ? sv(0) : 0.0;
  const double cutoff = static_cast<double>(std::max(features.rows(), features.cols())) *
                        std::numeric_limits<double>::epsilon() * top;
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  if (k > rank) {
    throw ArgumentError("k = " + std::to_string(k) + " exceeds the feature rank " + std::to_string(rank));
  }
  KPCAResult out;
  out.components = svd.matrixV().leftCols(k);
  out.singular_values = sv.head(k);
  out.captured = sv.head(k).squaredNorm();
  return out;
}

}  // namespace rrls
