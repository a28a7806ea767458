#pragma once

#include <cstdint>
#include <memory>
#include <mutex>

#include "rrls/common.hpp"
#include "rrls/data_io.hpp"
#include "rrls/kernels.hpp"
#include "rrls/nystrom.hpp"

namespace rrls {

/// Brute-force references on small dense kernel matrices. Every routine here
/// works on the explicit n x n matrix and is meant for verification only.
inline constexpr Index kOracleMaxPoints = 5000;

/// Explicit symmetric kernel matrix with a lazily computed spectrum.
class DenseKernel {
 public:
  explicit DenseKernel(Matrix k);
  static DenseKernel from_data(const KernelSpec& spec, const Dataset& data);

  const Matrix& matrix() const { return k_; }
  Index n() const { return k_.rows(); }
  double trace() const { return k_.trace(); }

  /// Nonincreasing eigenvalues.
  const Vector& eigenvalues() const;
  /// Orthonormal eigenvectors, columns ordered like eigenvalues().
  const Matrix& eigenvectors() const;
  double spectral_norm() const;

 private:
  struct Spectrum {
    std::once_flag values_once;
    std::once_flag vectors_once;
    Vector values;
    Matrix vectors;
  };
  Matrix k_;
  std::shared_ptr<Spectrum> spectrum_;
};

/// l_i = (K (K + lambda I)^{-1})_{ii} via the eigendecomposition.
Vector exact_ridge_scores(const DenseKernel& k, double lambda);

/// Second route: b_i^T (B^T B + lambda I)^{-1} b_i with B from pivoted
/// Cholesky (diagonal tolerance 1e-12 trace).
Vector exact_ridge_scores_factored(const DenseKernel& k, double lambda);

/// Pivoted Cholesky B (n x r) with B B^T ~ K, stopping when the largest
/// residual diagonal falls below `tolerance`.
Matrix pivoted_cholesky(const Matrix& k, double tolerance);

/// tr(K (K + lambda I)^{-1}).
double exact_deff(const DenseKernel& k, double lambda);

/// (1/k) * sum_{i>k} sigma_i(K).
double lambda_for_k(const DenseKernel& k, Index rank);

/// Eigenvalues (nonincreasing) of K - Z Z^T for approximation rows Z.
Vector residual_spectrum(const DenseKernel& k, const Matrix& rows);

/// Largest eigenvalue magnitude of K - K~ via a dense symmetric eigensolve.
double exact_spectral_error(const DenseKernel& k, const NystromFactors& factors);
double exact_spectral_error(const DenseKernel& k, const Matrix& rows);

/// Largest eigenvalue magnitude of K - Z Z^T by Lanczos with full
/// reorthogonalization on the dense matrix.
double lanczos_spectral_error(const DenseKernel& k, const Matrix& rows, std::size_t steps, std::uint64_t seed);

/// Fraction of `trials` random rank-k orthogonal projections X satisfying
/// tr(K - XKX) <= tr(K~ - XK~X) + c <= (1 + epsilon) tr(K - XKX) with
/// c = tr(K) - tr(K~), up to 1e-6 tr(K) slack. epsilon = infinity disables
/// the upper check.
double pcp_check(const DenseKernel& k, const NystromFactors& factors, Index rank, double epsilon,
                 std::size_t trials, std::uint64_t seed);

}  // namespace rrls
