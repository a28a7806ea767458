#include "rrls/nystrom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace rrls {

namespace {

Matrix gather(const Matrix& m, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

// Power iteration on E = K_sub - G G^T, where G holds the approximation's
// factor rows restricted to the subset.
SpectralEstimate power_iterate(const KernelSpec& spec, const Dataset& data, const std::vector<Index>& subset,
                               const Matrix& g, const SpectralEstimateOptions& options, EvalCounter& counter) {
  const auto m = static_cast<Index>(subset.size());
  const Index block = std::max<Index>(1, options.block_size);

  std::mt19937_64 rng(mix_seed(options.seed, 0x5eed));
  std::normal_distribution<double> normal;
  Vector v(m);
  for (Index i = 0; i < m; ++i) v(i) = normal(rng);
  v.normalize();

  auto apply = [&](const Vector& x) {
    Vector y(m);
    for (Index start = 0; start < m; start += block) {
      const Index len = std::min(block, m - start);
      const std::span<const Index> rows(subset.data() + start, static_cast<std::size_t>(len));
      y.segment(start, len) = kernel_block(spec, data, rows, subset, counter) * x;
    }
    y.noalias() -= g * (g.transpose() * x);
    return y;
  };

  SpectralEstimate out;
  out.subset_size = subset.size();
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t it = 0; it < options.iterations; ++it) {
    const Vector w = apply(v);
    const double rayleigh = v.dot(w);
    out.value = std::abs(rayleigh);
    out.iterations = it + 1;
    const double norm = w.norm();
    if (!(norm > 0.0)) {
      out.value = 0.0;
      break;
    }
    v = w / norm;
    if (std::isfinite(previous) && std::abs(rayleigh - previous) <= options.tolerance * std::abs(rayleigh)) break;
    previous = rayleigh;
  }
  return out;
}

}  // namespace

PseudoInverse symmetric_pseudoinverse(const Matrix& gram) {
  if (gram.rows() != gram.cols()) throw ArgumentError("pseudoinverse requires a square matrix");
  const Index s = gram.rows();
  PseudoInverse out;
  out.pinv = Matrix::Zero(s, s);
  out.root = Matrix::Zero(s, s);
  if (s == 0) return out;
  const Matrix sym = 0.5 * (gram + gram.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition of S^T K S failed");
  const Vector& values = solver.eigenvalues();
  const double top = values.maxCoeff();
  if (!(top > 0.0)) return out;
  const double cutoff = static_cast<double>(s) * std::numeric_limits<double>::epsilon() * top;
  Vector inv_sqrt = Vector::Zero(s);
  for (Index j = 0; j < s; ++j) {
    if (values(j) > cutoff) {
      inv_sqrt(j) = 1.0 / std::sqrt(values(j));
      ++out.rank;
    }
  }
  const Matrix& vectors = solver.eigenvectors();
  out.root = vectors * inv_sqrt.asDiagonal() * vectors.transpose();
  out.root = 0.5 * (out.root + out.root.transpose()).eval();
  out.pinv = vectors * inv_sqrt.array().square().matrix().asDiagonal() * vectors.transpose();
  out.pinv = 0.5 * (out.pinv + out.pinv.transpose()).eval();
  return out;
}

NystromFactors NystromFactors::from_columns(Matrix columns, std::vector<Index> landmarks) {
  if (static_cast<Index>(landmarks.size()) != columns.cols()) {
    throw ArgumentError("landmark count does not match column count");
  }
  for (const Index j : landmarks) {
    if (j < 0 || j >= columns.rows()) throw ArgumentError("landmark index out of range");
  }
  NystromFactors out;
  auto inverse = symmetric_pseudoinverse(gather(columns, landmarks));
  out.C = std::move(columns);
  out.Winv = std::move(inverse.pinv);
  out.root = std::move(inverse.root);
  out.rank = inverse.rank;
  out.landmark_indices = std::move(landmarks);
  return out;
}

NystromFactors build_factors(const KernelSpec& spec, const Dataset& data, const LandmarkSample& sample,
                             EvalCounter& counter) {
  if (sample.empty()) throw ArgumentError("cannot build Nystrom factors from an empty sample");
  std::vector<Index> landmarks = sample.indices;
  std::vector<Index> sorted = landmarks;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ArgumentError("landmark indices must be distinct");
  }
  Matrix columns = kernel_columns(spec, data, landmarks, counter);
  return NystromFactors::from_columns(std::move(columns), std::move(landmarks));
}

Vector approx_matvec(const NystromFactors& factors, const Vector& v) {
  if (v.size() != factors.n()) {
    throw ArgumentError("vector length " + std::to_string(v.size()) + " does not match n = " +
                        std::to_string(factors.n()));
  }
  // Winv = root * root; applying the root twice is far better conditioned
  // than forming Winv when S^T K S has tiny retained eigenvalues.
  return factors.C * (factors.root * (factors.root * (factors.C.transpose() * v)));
}

Matrix feature_map(const NystromFactors& factors) { return factors.factor_rows(); }

std::vector<Index> uniform_subset(Index n, std::size_t subset_size, std::uint64_t seed) {
  const auto m = std::min<std::size_t>(subset_size, static_cast<std::size_t>(n));
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first m entries become a uniform m-subset.
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, perm.size() - 1);
    std::swap(perm[i], perm[pick(rng)]);
  }
  perm.resize(m);
  std::sort(perm.begin(), perm.end());
  return perm;
}

SpectralEstimate estimate_spectral_error(const KernelSpec& spec, const Dataset& data,
                                         const NystromFactors& factors, const SpectralEstimateOptions& options,
                                         EvalCounter* counter) {
  if (factors.n() != data.n()) throw ArgumentError("factors do not match the dataset");
  return estimate_spectral_error(spec, data, factors.factor_rows(), options, counter);
}

SpectralEstimate estimate_spectral_error(const KernelSpec& spec, const Dataset& data, const Matrix& features,
                                         const SpectralEstimateOptions& options, EvalCounter* counter) {
  if (options.subset_size == 0) throw ArgumentError("subset size must be positive");
  if (features.rows() != data.n()) throw ArgumentError("approximation rows do not match the dataset");
  const auto subset = uniform_subset(data.n(), options.subset_size, mix_seed(options.seed, 0x50b));
  EvalCounter scratch;
  return power_iterate(spec, data, subset, gather(features, subset), options, counter ? *counter : scratch);
}

}  // namespace rrls
