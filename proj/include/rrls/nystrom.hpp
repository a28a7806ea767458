#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rrls/common.hpp"
#include "rrls/data_io.hpp"
#include "rrls/kernels.hpp"
#include "rrls/sampler.hpp"

namespace rrls {

/// Implicit Nystrom approximation K~ = C Winv C^T with C = K S (unweighted)
/// and Winv = (S^T K S)^+.
struct NystromFactors {
  Matrix C;       // n x s
  Matrix Winv;    // s x s, symmetric PSD
  std::vector<Index> landmark_indices;
  Index rank = 0;
  /// Symmetric s x s square root of Winv from the same truncated
  /// eigendecomposition of S^T K S (Winv = root * root).
  Matrix root;

  Index n() const { return C.rows(); }
  Index s() const { return C.cols(); }

  /// n x s rows G = C root with G G^T = K~.
  Matrix factor_rows() const { return C * root; }

  /// Restores Winv-consistent state (root, rank) from C and the landmark rows.
  static NystromFactors from_columns(Matrix columns, std::vector<Index> landmarks);
};

/// Truncated pseudoinverse of a symmetric PSD matrix: eigenvalues at or below
/// s * eps * max eigenvalue are zeroed.
struct PseudoInverse {
  Matrix pinv;
  Matrix root;  // symmetric, pinv = root * root
  Index rank = 0;
};
PseudoInverse symmetric_pseudoinverse(const Matrix& gram);

/// Build factors from a landmark sample (weights ignored). Exactly n * s
/// kernel evaluations.
NystromFactors build_factors(const KernelSpec& spec, const Dataset& data, const LandmarkSample& sample,
                             EvalCounter& counter);

/// C (Winv (C^T v)).
Vector approx_matvec(const NystromFactors& factors, const Vector& v);

/// n x s feature map F = C Winv^{1/2} with F F^T = K~.
Matrix feature_map(const NystromFactors& factors);

struct SpectralEstimateOptions {
  std::size_t subset_size = 20000;
  std::size_t iterations = 100;
  double tolerance = 1e-6;
  Index block_size = 2048;
  std::uint64_t seed = 0;
};

struct SpectralEstimate {
  double value = 0.0;
  std::size_t iterations = 0;
  std::size_t subset_size = 0;
};

/// Power-iteration estimate of the largest eigenvalue (in magnitude) of
/// K_sub - K~_sub on a seeded uniform subset of the points. K_sub is applied
/// block-row-wise so at most block_size * subset_size kernel values exist at
/// once.
SpectralEstimate estimate_spectral_error(const KernelSpec& spec, const Dataset& data,
                                         const NystromFactors& factors, const SpectralEstimateOptions& options,
                                         EvalCounter* counter = nullptr);

/// Same estimator for an explicit approximation K~ = Z Z^T given by its n x D
/// feature rows (e.g. random Fourier features).
SpectralEstimate estimate_spectral_error(const KernelSpec& spec, const Dataset& data, const Matrix& features,
                                         const SpectralEstimateOptions& options, EvalCounter* counter = nullptr);

/// Seeded uniform subset of size min(subset_size, n), ascending.
std::vector<Index> uniform_subset(Index n, std::size_t subset_size, std::uint64_t seed);

}  // namespace rrls
