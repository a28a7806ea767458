#pragma once

#include <cstdint>

#include "rrls/common.hpp"
#include "rrls/data_io.hpp"
#include "rrls/sampler.hpp"

namespace rrls {

/// s distinct landmarks drawn uniformly without replacement. Probabilities are
/// s/n; weights are 1.
LandmarkSample uniform_sample(Index n, Index s, std::uint64_t seed);

/// Random Fourier feature map for the Gaussian kernel
/// exp(-|x - y|^2 / (2 sigma^2)): z(x)_j = sqrt(2/D) cos(w_j^T x + b_j).
struct RFFMap {
  Matrix frequencies;  // D x d, entries ~ N(0, 1/sigma^2)
  Vector phases;       // D, uniform on [0, 2 pi)
  double sigma = 1.0;

  Index features() const { return frequencies.rows(); }
  Index dimension() const { return frequencies.cols(); }
};

RFFMap rff_build(Index d, Index D, double sigma, std::uint64_t seed);

/// n x D feature matrix Z; Z Z^T estimates the Gaussian Gram matrix.
Matrix rff_transform(const RFFMap& map, const Dataset& data);
Matrix rff_transform(const RFFMap& map, const RowMatrix& points);

}  // namespace rrls
