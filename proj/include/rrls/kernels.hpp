#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rrls/common.hpp"
#include "rrls/data_io.hpp"

namespace rrls {

struct GaussianKernel {
  double sigma = 1.0;  // K(x, y) = exp(-|x - y|^2 / (2 sigma^2))
};
struct LinearKernel {};
struct PolynomialKernel {
  int degree = 2;
  double offset = 0.0;  // K(x, y) = (<x, y> + offset)^degree
};

/// Immutable kernel descriptor.
class KernelSpec {
 public:
  using Kind = std::variant<GaussianKernel, LinearKernel, PolynomialKernel>;

  KernelSpec() : KernelSpec(GaussianKernel{}) {}
  KernelSpec(Kind kind);  // NOLINT(google-explicit-constructor)

  static KernelSpec gaussian(double sigma) { return KernelSpec(GaussianKernel{sigma}); }
  static KernelSpec linear() { return KernelSpec(LinearKernel{}); }
  static KernelSpec polynomial(int degree, double offset) {
    return KernelSpec(PolynomialKernel{degree, offset});
  }

  /// Parses `gaussian:sigma=2.5`, `linear`, `poly:degree=3,offset=1`.
  static KernelSpec parse(const std::string& text);
  std::string to_string() const;

  const Kind& kind() const { return kind_; }
  bool is_gaussian() const { return std::holds_alternative<GaussianKernel>(kind_); }
  double sigma() const;  // Throws ArgumentError for non-Gaussian kernels.

 private:
  Kind kind_;
};

/// Monotone count of scalar kernel evaluations. Safe for concurrent use.
class EvalCounter {
 public:
  EvalCounter() = default;
  EvalCounter(const EvalCounter&) = delete;
  EvalCounter& operator=(const EvalCounter&) = delete;

  void add(std::uint64_t evals) { count_.fetch_add(evals, std::memory_order_relaxed); }
  std::uint64_t count() const { return count_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> count_{0};
};

/// Single kernel evaluation; counts 1.
double eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y,
            EvalCounter& counter);

/// n x s matrix with column j = K(x_i, x_{landmarks[j]}); counts n * s.
Matrix kernel_columns(const KernelSpec& spec, const Dataset& data, std::span<const Index> landmarks,
                      EvalCounter& counter);

/// |rows| x |cols| block of the kernel matrix; counts |rows| * |cols|.
Matrix kernel_block(const KernelSpec& spec, const Dataset& data, std::span<const Index> rows,
                    std::span<const Index> cols, EvalCounter& counter);

/// Kernel between arbitrary query points (rows of `queries`) and data points.
Matrix kernel_cross(const KernelSpec& spec, const RowMatrix& queries, const Dataset& data,
                    std::span<const Index> cols, EvalCounter& counter);

/// Entry i = K(x_i, x_i); counts n.
Vector kernel_diagonal(const KernelSpec& spec, const Dataset& data, EvalCounter& counter);
Vector kernel_diagonal(const KernelSpec& spec, const Dataset& data, std::span<const Index> rows,
                       EvalCounter& counter);

/// Full n x n Gram matrix; counts n^2. Intended for small verification instances.
Matrix gram_matrix(const KernelSpec& spec, const Dataset& data, EvalCounter& counter);

}  // namespace rrls
