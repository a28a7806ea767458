#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "rrls/oracle.hpp"
#include "rrls/synthetic.hpp"

using namespace rrls;

TEST_CASE("a single zero-spread cluster sits on its center") {
  ClusterSpec spec;
  spec.sizes = {7};
  spec.centers = {(Vector(3) << 1.0, -2.0, 0.5).finished()};
  spec.spreads = {0.0};
  const Dataset data = clustered_gaussian(spec, 3);
  CHECK(data.n() == 7);
  for (Index i = 0; i < 7; ++i) CHECK(data.features.row(i) == spec.centers[0].transpose());
  CHECK(data.labels->cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("clustered data is seed-deterministic with contiguous labelled blocks") {
  const ClusterSpec spec = dominant_cluster_spec(1000, 2, 10, 0.9, 10.0, 1.0, 1.0);
  CHECK(spec.sizes.front() == 900);
  CHECK(std::accumulate(spec.sizes.begin(), spec.sizes.end(), Index{0}) == 1000);
  const Dataset a = clustered_gaussian(spec, 5);
  const Dataset b = clustered_gaussian(spec, 5);
  CHECK(a.features == b.features);
  CHECK(*a.labels == *b.labels);
  CHECK(clustered_gaussian(spec, 6).features != a.features);
  CHECK((*a.labels)(899) == 0.0);
  CHECK((*a.labels)(900) == 1.0);
  CHECK((*a.labels)(999) == 10.0);
  CHECK(spec.centers[3](0) == 30.0);
}

TEST_CASE("well-separated clusters have small effective dimension") {
  const ClusterSpec spec = dominant_cluster_spec(1000, 2, 10, 0.9, 10.0, 0.5, 0.5);
  const Dataset data = clustered_gaussian(spec, 1);
  const DenseKernel k = DenseKernel::from_data(KernelSpec::gaussian(1.0), data);
  CHECK(exact_deff(k, 1.0) < 100.0);
}

TEST_CASE("small clusters carry the larger ridge scores") {
  const ClusterSpec spec = dominant_cluster_spec(1000, 2, 10, 0.9, 10.0, 1.0, 0.3);
  const Dataset data = clustered_gaussian(spec, 2);
  const DenseKernel k = DenseKernel::from_data(KernelSpec::gaussian(1.0), data);
  const Vector scores = exact_ridge_scores(k, lambda_for_k(k, 20));
  CHECK(scores.tail(100).mean() > scores.head(900).mean());
}

TEST_CASE("graded small-cluster sizes") {
  const ClusterSpec spec = dominant_cluster_spec(4000, 2, 10, 0.9, 10.0, 0.05, 0.05, 0.8);
  CHECK(spec.n() == 4000);
  CHECK(spec.sizes.front() == 3600);
  for (std::size_t j = 2; j < spec.sizes.size(); ++j) CHECK(spec.sizes[j] <= spec.sizes[j - 1]);
  CHECK(spec.sizes[1] > 3 * spec.sizes.back());
}

TEST_CASE("cluster specifications are validated") {
  ClusterSpec spec;
  spec.sizes = {3, 4};
  spec.centers = {Vector::Zero(2)};
  spec.spreads = {1.0, 1.0};
  CHECK_THROWS_AS(spec.validate(), ArgumentError);
  spec.centers.push_back(Vector::Zero(2));
  CHECK_THROWS_AS(spec.validate(), ArgumentError);  // repeated center
  spec.centers[1] = Vector::Ones(2);
  spec.spreads[1] = -0.5;
  CHECK_THROWS_AS(spec.validate(), ArgumentError);
  spec.spreads[1] = 0.5;
  spec.sizes[0] = 0;
  CHECK_THROWS_AS(spec.validate(), ArgumentError);
  spec.sizes[0] = 3;
  CHECK_NOTHROW(spec.validate());
  CHECK_THROWS_AS(dominant_cluster_spec(100, 2, 3, 1.5, 5.0, 1.0, 1.0), ArgumentError);
}

TEST_CASE("controlled-spectrum kernels") {
  CHECK((spectrum_kernel(Vector::Ones(30), 4).matrix() - Matrix::Identity(30, 30)).cwiseAbs().maxCoeff() <= 1e-10);
  const DenseKernel two = spectrum_kernel((Vector(2) << 3.0, 1.0).finished(), 1);
  CHECK(lambda_for_k(two, 1) == doctest::Approx(1.0).epsilon(1e-12));

  Vector geometric(200);
  for (Index i = 0; i < 200; ++i) geometric(i) = std::pow(2.0, -static_cast<double>(i));
  const DenseKernel k = spectrum_kernel(geometric, 9);
  CHECK((k.matrix() - k.matrix().transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((k.eigenvalues() - geometric).cwiseAbs().maxCoeff() <= 1e-8);
  const double lambda = std::pow(2.0, -10.0);
  const auto above = static_cast<double>((geometric.array() > lambda).count());
  CHECK(std::abs(exact_deff(k, lambda) - above) <= 3.0);

  CHECK_THROWS_AS(spectrum_kernel((Vector(2) << 1.0, -0.1).finished(), 0), ArgumentError);
  CHECK_THROWS_AS(spectrum_kernel((Vector(2) << 1.0, 2.0).finished(), 0), ArgumentError);
}

TEST_CASE("random orthogonal matrices are orthogonal and seeded") {
  const Matrix q = random_orthogonal(40, 3);
  CHECK((q.transpose() * q - Matrix::Identity(40, 40)).norm() < 1e-12);
  CHECK(q == random_orthogonal(40, 3));
  CHECK(q != random_orthogonal(40, 4));
}
