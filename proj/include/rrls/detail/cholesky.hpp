#pragma once

#include "rrls/common.hpp"

namespace rrls::detail {

/// Cholesky of a symmetric positive definite matrix with escalating diagonal
/// jitter: none, then scale * 1e-12, 1e-11, 1e-10. Throws NumericalError when
/// every attempt fails.
Eigen::LLT<Matrix> jittered_cholesky(const Matrix& a, double scale);

}  // namespace rrls::detail
