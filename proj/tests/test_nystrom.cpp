#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "rrls/baselines.hpp"
#include "rrls/nystrom.hpp"
#include "rrls/oracle.hpp"
#include "rrls/synthetic.hpp"

using namespace rrls;

namespace {

LandmarkSample pick(std::vector<Index> indices) {
  LandmarkSample s;
  s.indices = std::move(indices);
  s.probabilities.assign(s.indices.size(), 1.0);
  s.weights.assign(s.indices.size(), 1.0);
  return s;
}

Matrix dense_approx(const NystromFactors& f) {
  const Matrix g = f.factor_rows();
  return g * g.transpose();
}

}  // namespace

TEST_CASE("full sample reproduces the kernel matrix") {
  const Dataset data = test::gaussian_data(60, 3, 2);
  const KernelSpec spec = KernelSpec::gaussian(2.0);
  const DenseKernel k = DenseKernel::from_data(spec, data);
  EvalCounter counter;
  const NystromFactors f = build_factors(spec, data, LandmarkSample::identity(60), counter);
  CHECK(counter.count() == 60 * 60);
  CHECK(exact_spectral_error(k, f) <= 1e-8 * k.spectral_norm());
  const Matrix feat = feature_map(f);
  CHECK((feat * feat.transpose() - k.matrix()).norm() <= 1e-8 * k.matrix().norm());
  Vector v = Vector::LinSpaced(60, -1.0, 2.0);
  CHECK((approx_matvec(f, v) - k.matrix() * v).norm() <= 1e-8 * (k.matrix() * v).norm());
}

TEST_CASE("a single landmark gives a rank-one approximation dominated on the diagonal") {
  const Dataset data = test::gaussian_data(30, 2, 5);
  const KernelSpec spec = KernelSpec::gaussian(1.0);
  const DenseKernel k = DenseKernel::from_data(spec, data);
  EvalCounter counter;
  const NystromFactors f = build_factors(spec, data, pick({7}), counter);
  CHECK(counter.count() == 30);
  CHECK(f.rank == 1);
  const Matrix feat = feature_map(f);
  CHECK(feat.rows() == 30);
  CHECK(feat.cols() == 1);
  const Matrix approx = dense_approx(f);
  for (Index i = 0; i < 30; ++i) CHECK(approx(i, i) <= k.matrix()(i, i) + 1e-12);
  const Eigen::JacobiSVD<Matrix> svd(approx);
  CHECK(svd.singularValues()(1) <= 1e-10 * svd.singularValues()(0));
}

TEST_CASE("two of three orthonormal landmarks project onto their span") {
  const Dataset data = test::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  EvalCounter counter;
  const NystromFactors f = build_factors(KernelSpec::linear(), data, pick({0, 1}), counter);
  const Matrix expect = (Vector(3) << 1.0, 1.0, 0.0).finished().asDiagonal();
  CHECK((dense_approx(f) - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(counter.count() == 6);
}

TEST_CASE("factor construction rejects empty and repeated samples") {
  const Dataset data = test::gaussian_data(10, 2, 1);
  EvalCounter counter;
  CHECK_THROWS_AS(build_factors(KernelSpec::linear(), data, LandmarkSample{}, counter), ArgumentError);
  CHECK_THROWS_AS(build_factors(KernelSpec::linear(), data, pick({2, 2}), counter), ArgumentError);
}

TEST_CASE("implicit matvec is linear and symmetric") {
  const Dataset data = test::gaussian_data(40, 2, 3);
  EvalCounter counter;
  const NystromFactors f = build_factors(KernelSpec::gaussian(1.0), data, uniform_sample(40, 8, 2), counter);
  CHECK(approx_matvec(f, Vector::Zero(40)).cwiseAbs().maxCoeff() == 0.0);
  const Matrix approx = dense_approx(f);
  for (Index i : {0, 13, 39}) {
    const Vector col = approx_matvec(f, Vector::Unit(40, i));
    CHECK((col - approx.col(i)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((col.transpose() - approx.row(i)).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK_THROWS_AS(approx_matvec(f, Vector::Zero(39)), ArgumentError);
}

TEST_CASE("rank-deficient landmark blocks truncate the feature map") {
  // Linear kernel in two dimensions: at most rank 2 whatever the sample size.
  const Dataset data = test::gaussian_data(30, 2, 6);
  EvalCounter counter;
  const NystromFactors f = build_factors(KernelSpec::linear(), data, pick({0, 3, 5, 8, 11}), counter);
  CHECK(f.rank == 2);
  const Matrix feat = feature_map(f);
  const Eigen::JacobiSVD<Matrix> svd(feat);
  int nonzero = 0;
  for (Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > 1e-10 * svd.singularValues()(0)) ++nonzero;
  }
  CHECK(nonzero <= f.rank);
  CHECK((feat * feat.transpose() - dense_approx(f)).norm() <= 1e-8 * dense_approx(f).norm());
  CHECK((f.root * f.root - f.Winv).norm() <= 1e-10 * f.Winv.norm());
  CHECK((f.Winv - f.Winv.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * f.Winv.cwiseAbs().maxCoeff());
}

TEST_CASE("truncated pseudoinverse zeroes negligible eigenvalues") {
  const Matrix gram = (Vector(2) << 1.0, 1e-20).finished().asDiagonal();
  const PseudoInverse p = symmetric_pseudoinverse(gram);
  CHECK(p.rank == 1);
  CHECK(p.pinv(0, 0) == doctest::Approx(1.0));
  CHECK(p.pinv(1, 1) == 0.0);
  CHECK_THROWS_AS(symmetric_pseudoinverse(Matrix::Zero(2, 3)), ArgumentError);
}

TEST_CASE("approximations are dominated by the kernel and rebuild bit-identically") {
  const Dataset data = clustered_gaussian(dominant_cluster_spec(300, 2, 5, 0.9, 6.0, 1.0, 0.2), 4);
  const KernelSpec spec = KernelSpec::gaussian(1.0);
  const DenseKernel k = DenseKernel::from_data(spec, data);
  const Vector sigma = k.eigenvalues();
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const LandmarkSample sample = uniform_sample(300, 5 + 10 * static_cast<Index>(seed), seed);
    EvalCounter counter;
    const NystromFactors f = build_factors(spec, data, sample, counter);
    const Vector residual = residual_spectrum(k, f.factor_rows());
    CHECK(residual.minCoeff() >= -1e-8 * k.spectral_norm());
    const Eigen::SelfAdjointEigenSolver<Matrix> approx(dense_approx(f), Eigen::EigenvaluesOnly);
    const Vector approx_sigma = approx.eigenvalues().reverse();
    CHECK((approx_sigma - sigma).maxCoeff() <= 1e-8);

    const NystromFactors again = build_factors(spec, data, sample, counter);
    CHECK(again.C == f.C);
    CHECK(again.Winv == f.Winv);
    CHECK(again.root == f.root);
  }
}

TEST_CASE("factors restore from their columns") {
  const Dataset data = test::gaussian_data(25, 2, 8);
  EvalCounter counter;
  const NystromFactors f = build_factors(KernelSpec::gaussian(1.0), data, pick({1, 4, 9}), counter);
  const NystromFactors g = NystromFactors::from_columns(f.C, f.landmark_indices);
  CHECK(g.rank == f.rank);
  CHECK((g.Winv - f.Winv).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(NystromFactors::from_columns(f.C, {1, 4}), ArgumentError);
}

TEST_CASE("projection costs are preserved for ridge-leverage samples") {
  const Dataset data = test::gaussian_data(300, 4, 1);
  const KernelSpec spec = KernelSpec::gaussian(2.0);
  const DenseKernel k = DenseKernel::from_data(spec, data);
  const double lambda = 0.5 / 5.0 * (k.eigenvalues().tail(295).cwiseMax(0.0).sum());
  int good = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SamplerConfig config;
    config.seed = seed;
    config.base_case_threshold = 32;
    EvalCounter counter;
    const NystromFactors f =
        build_factors(spec, data, recursive_rls_fixed_lambda(spec, data, lambda, config, counter), counter);
    if (pcp_check(k, f, 5, 0.5, 50, seed) >= 0.9) ++good;
  }
  CHECK(good >= 4);
}

TEST_CASE("spectral error estimator examples") {
  const Dataset data = test::gaussian_data(80, 2, 4);
  const KernelSpec spec = KernelSpec::gaussian(1.0);
  EvalCounter counter;
  SpectralEstimateOptions options;
  options.subset_size = 80;
  const NystromFactors full = build_factors(spec, data, LandmarkSample::identity(80), counter);
  CHECK(estimate_spectral_error(spec, data, full, options).value <= 1e-6 * 80.0);

  Dataset same;
  same.features = RowMatrix::Constant(50, 3, 0.7);
  const NystromFactors one = build_factors(KernelSpec::linear(), same, pick({4}), counter);
  options.subset_size = 50;
  CHECK(estimate_spectral_error(KernelSpec::linear(), same, one, options).value <= 1e-12);

  options.subset_size = 0;
  CHECK_THROWS_AS(estimate_spectral_error(spec, data, full, options), ArgumentError);

  // Subsets larger than n are clamped.
  options.subset_size = 1000;
  const SpectralEstimate clamped = estimate_spectral_error(spec, data, full, options);
  CHECK(clamped.subset_size == 80);
}

TEST_CASE("spectral error estimator agrees with the dense eigensolve") {
  const Dataset data = clustered_gaussian(dominant_cluster_spec(500, 2, 5, 0.9, 6.0, 1.0, 0.3), 2);
  const KernelSpec spec = KernelSpec::gaussian(1.0);
  const DenseKernel k = DenseKernel::from_data(spec, data);
  EvalCounter counter;
  const NystromFactors f = build_factors(spec, data, uniform_sample(500, 30, 3), counter);
  const double exact = exact_spectral_error(k, f);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SpectralEstimateOptions options;
    options.subset_size = 500;
    options.iterations = 200;
    options.tolerance = 1e-12;
    options.block_size = 128;
    options.seed = seed;
    EvalCounter est_counter;
    const SpectralEstimate est = estimate_spectral_error(spec, data, f, options, &est_counter);
    CHECK(std::abs(est.value - exact) <= 0.01 * exact);
    CHECK(est_counter.count() > 0);
  }
}

TEST_CASE("seeded uniform subsets") {
  const auto a = uniform_subset(100, 10, 4);
  CHECK(a.size() == 10);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(a == uniform_subset(100, 10, 4));
  CHECK(uniform_subset(5, 10, 4).size() == 5);
}
