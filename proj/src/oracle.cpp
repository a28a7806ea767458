#include "rrls/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace rrls {

namespace {

void check_size(Index n) {
  if (n > kOracleMaxPoints) {
    throw ArgumentError("oracle refuses n = " + std::to_string(n) + " (cap " + std::to_string(kOracleMaxPoints) +
                        ")");
  }
}

void check_lambda(double lambda) {
  if (!(lambda > 0.0)) throw ArgumentError("lambda must be positive");
}

Vector descending(const Vector& ascending) { return ascending.reverse(); }

}  // namespace

DenseKernel::DenseKernel(Matrix k) : k_(std::move(k)), spectrum_(std::make_shared<Spectrum>()) {
  if (k_.rows() != k_.cols()) throw ArgumentError("kernel matrix must be square");
  if (k_.rows() < 1) throw ArgumentError("kernel matrix must be nonempty");
  check_size(k_.rows());
  const double scale = std::max(1.0, k_.cwiseAbs().maxCoeff());
  if ((k_ - k_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ArgumentError("kernel matrix is not symmetric");
  }
}

DenseKernel DenseKernel::from_data(const KernelSpec& spec, const Dataset& data) {
  check_size(data.n());
  EvalCounter counter;
  return DenseKernel(gram_matrix(spec, data, counter));
}

const Vector& DenseKernel::eigenvalues() const {
  std::call_once(spectrum_->values_once, [&] {
    const Eigen::SelfAdjointEigenSolver<Matrix> solver(k_, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("dense eigensolve failed");
    spectrum_->values = descending(solver.eigenvalues());
  });
  return spectrum_->values;
}

const Matrix& DenseKernel::eigenvectors() const {
  std::call_once(spectrum_->vectors_once, [&] {
    const Eigen::SelfAdjointEigenSolver<Matrix> solver(k_);
    if (solver.info() != Eigen::Success) throw NumericalError("dense eigensolve failed");
    spectrum_->vectors = solver.eigenvectors().rowwise().reverse();
  });
  return spectrum_->vectors;
}

double DenseKernel::spectral_norm() const { return eigenvalues().cwiseAbs().maxCoeff(); }

Vector exact_ridge_scores(const DenseKernel& k, double lambda) {
  check_lambda(lambda);
  // Eigenvalues from the full decomposition so they pair with the vectors.
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(k.matrix());
  if (solver.info() != Eigen::Success) throw NumericalError("dense eigensolve failed");
  const Vector sigma = solver.eigenvalues().cwiseMax(0.0);
  const Vector shrink = (sigma.array() / (sigma.array() + lambda)).matrix();
  const Vector scores = solver.eigenvectors().array().square().matrix() * shrink;
  return scores.cwiseMax(0.0).cwiseMin(1.0);
}

Matrix pivoted_cholesky(const Matrix& k, double tolerance) {
  const Index n = k.rows();
  Vector residual = k.diagonal();
  Matrix b = Matrix::Zero(n, n);
  Index rank = 0;
  for (; rank < n; ++rank) {
    Index pivot = 0;
    const double top = residual.maxCoeff(&pivot);
    if (!(top > tolerance)) break;
    Vector column = k.col(pivot);
    if (rank > 0) column -= b.leftCols(rank) * b.row(pivot).head(rank).transpose();
    column /= std::sqrt(top);
    b.col(rank) = column;
    residual -= column.array().square().matrix();
    residual(pivot) = 0.0;
  }
  return b.leftCols(rank);
}

Vector exact_ridge_scores_factored(const DenseKernel& k, double lambda) {
  check_lambda(lambda);
  const Matrix b = pivoted_cholesky(k.matrix(), 1e-12 * k.trace());
  Matrix core = b.transpose() * b;
  core.diagonal().array() += lambda;
  const Eigen::LLT<Matrix> llt(core);
  if (llt.info() != Eigen::Success) throw NumericalError("factored score system is not positive definite");
  Matrix y = b.transpose();
  llt.matrixL().solveInPlace(y);
  return y.colwise().squaredNorm().transpose();
}

double exact_deff(const DenseKernel& k, double lambda) {
  check_lambda(lambda);
  const Vector sigma = k.eigenvalues().cwiseMax(0.0);
  return (sigma.array() / (sigma.array() + lambda)).sum();
}

double lambda_for_k(const DenseKernel& k, Index rank) {
  if (rank < 1 || rank > k.n()) {
    throw ArgumentError("k = " + std::to_string(rank) + " must lie in [1, " + std::to_string(k.n()) + "]");
  }
  const Vector sigma = k.eigenvalues().cwiseMax(0.0);
  const double lambda = sigma.tail(k.n() - rank).sum() / static_cast<double>(rank);
  if (lambda > 0.0 && exact_deff(k, lambda) > 2.0 * static_cast<double>(rank) + 1e-8) {
    throw NumericalError("effective dimension bound violated at the tail-average lambda");
  }
  return lambda;
}

Vector residual_spectrum(const DenseKernel& k, const Matrix& rows) {
  if (rows.rows() != k.n()) throw ArgumentError("approximation rows do not match the kernel size");
  Matrix residual = k.matrix();
  residual.selfadjointView<Eigen::Lower>().rankUpdate(rows, -1.0);
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(residual, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("dense eigensolve failed");
  return descending(solver.eigenvalues());
}

double exact_spectral_error(const DenseKernel& k, const Matrix& rows) {
  return residual_spectrum(k, rows).cwiseAbs().maxCoeff();
}

double exact_spectral_error(const DenseKernel& k, const NystromFactors& factors) {
  return exact_spectral_error(k, factors.factor_rows());
}

double lanczos_spectral_error(const DenseKernel& k, const Matrix& rows, std::size_t steps, std::uint64_t seed) {
  if (rows.rows() != k.n()) throw ArgumentError("approximation rows do not match the kernel size");
  const Index n = k.n();
  const Index m = std::min<Index>(static_cast<Index>(steps), n);
  auto apply = [&](const Vector& v) -> Vector {
    Vector out = k.matrix() * v;
    out.noalias() -= rows * (rows.transpose() * v);
    return out;
  };
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix basis(n, m);
  Vector q(n);
  for (Index i = 0; i < n; ++i) q(i) = normal(rng);
  q.normalize();
  Vector alpha = Vector::Zero(m);
  Vector beta = Vector::Zero(m);
  Index used = 0;
  for (Index j = 0; j < m; ++j) {
    basis.col(j) = q;
    used = j + 1;
    Vector w = apply(q);
    alpha(j) = q.dot(w);
    // Full reorthogonalization, applied twice.
    for (int pass = 0; pass < 2; ++pass) w -= basis.leftCols(used) * (basis.leftCols(used).transpose() * w);
    const double b = w.norm();
    if (j + 1 == m || b <= 1e-14 * std::max(1.0, std::abs(alpha(j)))) break;
    beta(j) = b;
    q = w / b;
  }
  Matrix t = Matrix::Zero(used, used);
  for (Index j = 0; j < used; ++j) {
    t(j, j) = alpha(j);
    if (j + 1 < used) t(j, j + 1) = t(j + 1, j) = beta(j);
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(t, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double pcp_check(const DenseKernel& k, const NystromFactors& factors, Index rank, double epsilon,
                 std::size_t trials, std::uint64_t seed) {
  const Index n = k.n();
  if (rank < 1 || rank >= n) throw ArgumentError("projection rank must lie in [1, n)");
  if (factors.n() != n) throw ArgumentError("factors do not match the kernel size");
  if (trials == 0) throw ArgumentError("at least one trial is required");
  const Matrix g = factors.factor_rows();
  const double trace_k = k.trace();
  const double trace_approx = g.squaredNorm();
  const double offset = trace_k - trace_approx;
  const double slack = 1e-6 * std::max(1.0, std::abs(trace_k));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::size_t passed = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Matrix gauss(n, rank);
    for (Index j = 0; j < rank; ++j) {
      for (Index i = 0; i < n; ++i) gauss(i, j) = normal(rng);
    }
    const Eigen::HouseholderQR<Matrix> qr(gauss);
    const Matrix q = qr.householderQ() * Matrix::Identity(n, rank);
    // tr(X A X) = tr(Q^T A Q) for X = Q Q^T.
    const double proj_k = (q.transpose() * k.matrix() * q).trace();
    const double proj_approx = (g.transpose() * q).squaredNorm();
    const double exact_cost = trace_k - proj_k;
    const double approx_cost = trace_approx - proj_approx + offset;
    const bool lower = exact_cost <= approx_cost + slack;
    const bool upper = std::isinf(epsilon) || approx_cost <= (1.0 + epsilon) * exact_cost + slack;
    if (lower && upper) ++passed;
  }
  return static_cast<double>(passed) / static_cast<double>(trials);
}

}  // namespace rrls
