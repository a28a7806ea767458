#include "rrls/baselines.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "rrls/nystrom.hpp"

namespace rrls {

LandmarkSample uniform_sample(Index n, Index s, std::uint64_t seed) {
  if (s < 1) throw ArgumentError("uniform sample size must be >= 1");
  if (s > n) {
    throw ArgumentError("cannot draw " + std::to_string(s) + " distinct landmarks from " + std::to_string(n) +
                        " points");
  }
  LandmarkSample out;
  out.indices = uniform_subset(n, static_cast<std::size_t>(s), seed);
  const double p = static_cast<double>(s) / static_cast<double>(n);
  out.probabilities.assign(out.indices.size(), p);
  out.weights.assign(out.indices.size(), 1.0);
  return out;
}

RFFMap rff_build(Index d, Index D, double sigma, std::uint64_t seed) {
  if (D < 1) throw ArgumentError("random Fourier features require D >= 1");
  if (d < 0) throw ArgumentError("dimension must be nonnegative");
  if (!(sigma > 0.0)) throw ArgumentError("sigma must be positive");
  RFFMap map;
  map.sigma = sigma;
  map.frequencies.resize(D, d);
  map.phases.resize(D);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / sigma);
  for (Index j = 0; j < D; ++j) {
    for (Index t = 0; t < d; ++t) map.frequencies(j, t) = normal(rng);
  }
  for (Index j = 0; j < D; ++j) map.phases(j) = 2.0 * std::numbers::pi * uniform01(rng);
  return map;
}

Matrix rff_transform(const RFFMap& map, const RowMatrix& points) {
  if (points.cols() != map.dimension()) {
    throw ArgumentError("data dimension " + std::to_string(points.cols()) + " does not match map dimension " +
                        std::to_string(map.dimension()));
  }
  Matrix z = points * map.frequencies.transpose();
  z.rowwise() += map.phases.transpose();
  const double scale = std::sqrt(2.0 / static_cast<double>(map.features()));
  return (z.array().cos() * scale).matrix();
}

Matrix rff_transform(const RFFMap& map, const Dataset& data) { return rff_transform(map, data.features); }

}  // namespace rrls
