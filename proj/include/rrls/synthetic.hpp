#pragma once

#include <cstdint>
#include <vector>

#include "rrls/common.hpp"
#include "rrls/data_io.hpp"
#include "rrls/oracle.hpp"

namespace rrls {

/// Isotropic Gaussian clusters. sizes, centers and spreads are parallel.
struct ClusterSpec {
  std::vector<Index> sizes;
  std::vector<Vector> centers;  // all of the same dimension
  std::vector<double> spreads;  // per-cluster standard deviation, >= 0

  Index n() const;
  Index d() const { return centers.empty() ? 0 : centers.front().size(); }
  /// Throws ArgumentError on mismatched lengths, empty clusters, negative
  /// spreads or repeated centers.
  void validate() const;
};

/// Points drawn around each center in order (cluster j occupies a
/// contiguous block of rows). Labels hold the cluster index.
Dataset clustered_gaussian(const ClusterSpec& spec, std::uint64_t seed);

/// One dominant cluster with `dominant_fraction` of n points and `small`
/// clusters sharing the rest, sized proportionally to size_ratio^j (1: equal
/// sizes). Centers sit at separation * j * e_0 for cluster j.
ClusterSpec dominant_cluster_spec(Index n, Index d, Index small, double dominant_fraction, double separation,
                                  double dominant_spread, double small_spread, double size_ratio = 1.0);

/// K = Q diag(eigenvalues) Q^T with a seeded random orthogonal Q.
DenseKernel spectrum_kernel(const Vector& eigenvalues, std::uint64_t seed);

/// Seeded Haar-like orthogonal matrix: QR of a Gaussian matrix with the
/// diagonal of R made positive.
Matrix random_orthogonal(Index n, std::uint64_t seed);

}  // namespace rrls
