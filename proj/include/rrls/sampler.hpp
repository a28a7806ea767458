#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rrls/common.hpp"
#include "rrls/data_io.hpp"
#include "rrls/kernels.hpp"

namespace rrls {

/// Approximate lambda-ridge leverage scores for every point.
struct RidgeScores {
  Vector scores;  // >= 0
  double lambda = 0.0;
};

/// Selected landmarks: the columns of a weighted selection matrix S whose
/// column j is weights[j] * e_{indices[j]}.
struct LandmarkSample {
  std::vector<Index> indices;  // distinct, ascending
  std::vector<double> probabilities;
  std::vector<double> weights;  // 1 / sqrt(probability)

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }

  /// All points 0..n-1 with unit weight.
  static LandmarkSample identity(Index n);

  std::string to_csv() const;
  static LandmarkSample from_csv(const std::string& text);
};

enum class SamplerMode { TheoryFixedLambda, TheoryFixedSize, Practical };

std::string to_string(SamplerMode mode);
SamplerMode parse_sampler_mode(const std::string& text);

struct SamplerConfig {
  double delta = 0.01;
  /// Practical mode only. Unset: fixed-size recursions choose the multiplier
  /// so the expected sample size equals the level target; fixed-lambda
  /// recursions use log(sum(scores) / delta).
  std::optional<double> oversampling_multiplier;
  SamplerMode mode = SamplerMode::Practical;
  bool accelerated = false;
  /// Unset: 192 log(1/delta) per level (theory, fixed lambda), s (theory,
  /// fixed size), 2 s (practical, fixed size), 256 (practical, fixed lambda).
  std::optional<std::size_t> base_case_threshold;
  /// Constant c in `c k log(2k/delta) <= s`. Unset: 384 (theory), 4 (practical).
  std::optional<double> size_constant;
  std::uint64_t seed = 0;

  void validate() const;
  bool theory() const { return mode != SamplerMode::Practical; }

  /// Flat key=value lines; `auto` marks unset optional fields.
  std::string serialize() const;
  static SamplerConfig parse(const std::string& text);
};

/// Extra inputs to the probability rule that depend on the recursion.
struct ProbabilityTarget {
  std::size_t k = 0;              // TheoryFixedSize: rank target in log(2k/delta)
  std::optional<double> budget;   // Practical without multiplier: expected sample size
};

/// Per-level record of a recursive run. Levels are listed top (depth 0) first.
struct LevelTrace {
  std::size_t depth = 0;
  std::size_t points = 0;           // m at this level
  std::size_t sample_in = 0;        // size of the sample used to estimate scores
  std::size_t target = 0;           // fixed-size target at this level (0: fixed lambda)
  std::size_t rank_target = 0;      // k (fixed size only)
  double lambda = 0.0;
  double delta = 0.0;
  double score_sum = 0.0;
  double probability_sum = 0.0;
  std::size_t selected = 0;
  bool base_case = false;
  std::uint64_t kernel_evals = 0;
};

struct SamplerTrace {
  std::vector<LevelTrace> levels;
  std::uint64_t total_kernel_evals() const;
  std::size_t depth() const { return levels.size(); }
};

/// Scores (multiplier / lambda) * (K - K S (S^T K S + lambda I)^{-1} S^T K)_{ii}
/// where S carries the sample weights. Uses only K S and diag(K); consumes
/// exactly n * s + n kernel evaluations.
RidgeScores scores_from_sample(const KernelSpec& spec, const Dataset& data, const LandmarkSample& sample,
                               double lambda, double score_multiplier, EvalCounter& counter);

/// Same as scores_from_sample restricted to the points `rows` (global indices);
/// sample indices are global and must be a subset of `rows`.
RidgeScores scores_on_subset(const KernelSpec& spec, const Dataset& data, std::span<const Index> rows,
                             const LandmarkSample& sample, double lambda, double score_multiplier,
                             EvalCounter& counter);

/// Sampling probabilities p_i = min(1, score_i * factor) with the factor chosen
/// by the configured mode.
Vector probabilities(const RidgeScores& scores, const SamplerConfig& config,
                     const ProbabilityTarget& target = {});

/// Multiplier m such that sum_i min(1, m * scores_i) equals `budget`, or the
/// smallest multiplier selecting every positive score when that is impossible.
double multiplier_for_budget(const Vector& scores, double budget);

/// Independent Bernoulli draws; retries with seed + 1 up to 16 times on an
/// empty draw before throwing EmptySampleError.
LandmarkSample bernoulli_select(const Vector& probabilities, std::uint64_t seed);

/// Recursive ridge leverage score sampling at a fixed ridge parameter.
LandmarkSample recursive_rls_fixed_lambda(const KernelSpec& spec, const Dataset& data, double lambda,
                                          const SamplerConfig& config, EvalCounter& counter,
                                          SamplerTrace* trace = nullptr);

/// Recursive ridge leverage score sampling targeting s landmarks; lambda is
/// chosen at each level from the spectrum of the current sample.
LandmarkSample recursive_rls_fixed_size(const KernelSpec& spec, const Dataset& data, std::size_t s,
                                        const SamplerConfig& config, EvalCounter& counter,
                                        SamplerTrace* trace = nullptr);

/// ceil(sqrt((n s + s^3) / n)): the per-level target under acceleration.
std::size_t accelerated_cap(std::size_t n, std::size_t s);

/// Largest integer k >= 1 with c k log(2k/delta) <= s (1 if none).
std::size_t rank_for_size(std::size_t s, double c, double delta);

/// (1/k) * sum_{i>k} of the eigenvalue magnitudes of a symmetric PSD matrix,
/// with missing values treated as zero.
double tail_lambda(const Matrix& gram, std::size_t k);

}  // namespace rrls
