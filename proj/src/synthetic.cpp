#include "rrls/synthetic.hpp"

#include <cmath>
#include <random>

namespace rrls {

Index ClusterSpec::n() const {
  Index total = 0;
  for (const Index s : sizes) total += s;
  return total;
}

void ClusterSpec::validate() const {
  if (sizes.empty()) throw ArgumentError("cluster spec needs at least one cluster");
  if (centers.size() != sizes.size() || spreads.size() != sizes.size()) {
    throw ArgumentError("cluster sizes, centers and spreads differ in length");
  }
  const Index dim = d();
  if (dim < 1) throw ArgumentError("cluster centers must have dimension >= 1");
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    if (sizes[j] < 1) throw ArgumentError("cluster " + std::to_string(j) + " is empty");
    if (centers[j].size() != dim) throw ArgumentError("cluster centers differ in dimension");
    if (!(spreads[j] >= 0.0) || !std::isfinite(spreads[j])) {
      throw ArgumentError("cluster spread must be finite and nonnegative");
    }
    for (std::size_t i = 0; i < j; ++i) {
      if (centers[i] == centers[j]) throw ArgumentError("cluster centers must be distinct");
    }
  }
}

Dataset clustered_gaussian(const ClusterSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(mix_seed(seed, 0xc1));
  std::normal_distribution<double> normal;
  Dataset out;
  out.features.resize(spec.n(), spec.d());
  Vector labels(spec.n());
  Index row = 0;
  for (std::size_t j = 0; j < spec.sizes.size(); ++j) {
    for (Index i = 0; i < spec.sizes[j]; ++i, ++row) {
      for (Index c = 0; c < spec.d(); ++c) {
        out.features(row, c) = spec.centers[j](c) + spec.spreads[j] * normal(rng);
      }
      labels(row) = static_cast<double>(j);
    }
  }
  out.labels = std::move(labels);
  return out;
}

ClusterSpec dominant_cluster_spec(Index n, Index d, Index small, double dominant_fraction, double separation,
                                  double dominant_spread, double small_spread, double size_ratio) {
  if (d < 1 || small < 0) throw ArgumentError("dimension must be >= 1 and cluster count >= 0");
  if (!(dominant_fraction > 0.0 && dominant_fraction <= 1.0)) {
    throw ArgumentError("dominant fraction must lie in (0, 1]");
  }
  const Index big = small == 0 ? n : static_cast<Index>(std::llround(dominant_fraction * static_cast<double>(n)));
  const Index rest = n - big;
  if (big < 1 || (small > 0 && rest < small)) throw ArgumentError("too few points for the requested clusters");
  if (!(size_ratio > 0.0 && size_ratio <= 1.0)) throw ArgumentError("size ratio must lie in (0, 1]");
  // Floor of the proportional share (at least one point each); leftovers go
  // to the largest clusters first.
  std::vector<Index> sizes(static_cast<std::size_t>(small), 1);
  if (small > 0) {
    std::vector<double> share(static_cast<std::size_t>(small));
    double total = 0.0;
    for (Index j = 0; j < small; ++j) total += share[static_cast<std::size_t>(j)] = std::pow(size_ratio, j);
    Index used = 0;
    for (Index j = 0; j < small; ++j) {
      auto& sz = sizes[static_cast<std::size_t>(j)];
      sz = std::max<Index>(1, static_cast<Index>(static_cast<double>(rest) * share[static_cast<std::size_t>(j)] / total));
      used += sz;
    }
    for (Index j = 0; used > rest; j = (j + 1) % small) {
      auto& sz = sizes[static_cast<std::size_t>(small - 1 - j)];
      if (sz > 1) --sz, --used;
    }
    for (Index j = 0; used < rest; j = (j + 1) % small) ++sizes[static_cast<std::size_t>(j)], ++used;
  }
  ClusterSpec spec;
  spec.sizes.push_back(big);
  spec.centers.push_back(Vector::Zero(d));
  spec.spreads.push_back(dominant_spread);
  for (Index j = 0; j < small; ++j) {
    spec.sizes.push_back(sizes[static_cast<std::size_t>(j)]);
    Vector center = Vector::Zero(d);
    center(0) = separation * static_cast<double>(j + 1);
    spec.centers.push_back(center);
    spec.spreads.push_back(small_spread);
  }
  return spec;
}

Matrix random_orthogonal(Index n, std::uint64_t seed) {
  if (n < 1) throw ArgumentError("orthogonal matrix size must be >= 1");
  std::mt19937_64 rng(mix_seed(seed, 0x0a7));
  std::normal_distribution<double> normal;
  Matrix g(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) g(i, j) = normal(rng);
  }
  const Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

DenseKernel spectrum_kernel(const Vector& eigenvalues, std::uint64_t seed) {
  const Index n = eigenvalues.size();
  if (n < 1) throw ArgumentError("spectrum must be nonempty");
  for (Index i = 0; i < n; ++i) {
    if (!(eigenvalues(i) >= 0.0)) throw ArgumentError("spectrum entries must be nonnegative");
    if (i > 0 && eigenvalues(i) > eigenvalues(i - 1)) throw ArgumentError("spectrum must be nonincreasing");
  }
  const Matrix q = random_orthogonal(n, seed);
  Matrix k = q * eigenvalues.asDiagonal() * q.transpose();
  k = 0.5 * (k + k.transpose()).eval();
  return DenseKernel(std::move(k));
}

}  // namespace rrls
