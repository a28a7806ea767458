#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rrls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument: bad dimensions, out-of-range indices, bad parameters.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Structurally malformed input file (ragged rows, index ordering).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A token in an input file could not be parsed as a number.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A factorization failed even after jitter escalation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Bernoulli sampling produced no landmarks.
class EmptySampleError : public Error {
 public:
  using Error::Error;
};

/// Scores or kernel carry no mass (sum of scores or trace is zero).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Deterministic 64-bit mixer (splitmix64 finalizer). Used to derive
/// independent child seeds from a parent seed and a salt.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit engine draw.
template <class Engine>
double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace rrls
