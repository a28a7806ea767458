#include "rrls/sampler.hpp"

#include "rrls/detail/cholesky.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_map>

namespace rrls {

namespace {

constexpr Index kRowBlock = 2048;
constexpr int kEmptyDrawRetries = 16;

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

using LambdaRule = std::function<double(const Matrix& weighted_gram)>;

// Shared implementation of the subsample score formula. `rows` are global
// point indices; the sample's indices are global and must appear in `rows`.
RidgeScores compute_scores(const KernelSpec& spec, const Dataset& data, std::span<const Index> rows,
                           const LandmarkSample& sample, const LambdaRule& lambda_rule,
                           double multiplier, EvalCounter& counter) {
  if (sample.empty()) throw ArgumentError("score estimation requires a nonempty sample");
  if (sample.weights.size() != sample.size()) throw ArgumentError("sample weights do not match indices");
  if (!(multiplier > 0.0)) throw ArgumentError("score multiplier must be positive");

  std::unordered_map<Index, Index> position;
  position.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) position.emplace(rows[i], static_cast<Index>(i));
  std::vector<char> is_landmark(rows.size(), 0);
  for (const Index j : sample.indices) {
    const auto it = position.find(j);
    if (it == position.end()) {
      throw ArgumentError("sample index " + std::to_string(j) + " is not among the scored points");
    }
    is_landmark[static_cast<std::size_t>(it->second)] = 1;
  }

  const auto s = static_cast<Index>(sample.size());
  const Eigen::Map<const Vector> w(sample.weights.data(), s);

  // Landmark rows first: they provide S^T K S without extra evaluations.
  const Matrix landmark_rows = kernel_block(spec, data, sample.indices, sample.indices, counter);
  Matrix weighted_gram = w.asDiagonal() * landmark_rows * w.asDiagonal();
  weighted_gram = 0.5 * (weighted_gram + weighted_gram.transpose()).eval();

  const double lambda = lambda_rule(weighted_gram);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ArgumentError("ridge parameter must be positive");

  Matrix regularized = weighted_gram;
  regularized.diagonal().array() += lambda;
  const auto llt = detail::jittered_cholesky(regularized, lambda);

  const Vector diag = kernel_diagonal(spec, data, rows, counter);
  Vector projected(static_cast<Index>(rows.size()));

  auto absorb = [&](const Matrix& block, std::span<const Index> positions) {
    // Columns of y are L^{-1} (K_{i,S} W)^T; their squared norms give the
    // diagonal of K S (S^T K S + lambda I)^{-1} S^T K.
    Matrix y = (block * w.asDiagonal()).transpose();
    llt.matrixL().solveInPlace(y);
    const Vector norms = y.colwise().squaredNorm().transpose();
    for (std::size_t t = 0; t < positions.size(); ++t) projected(positions[t]) = norms(static_cast<Index>(t));
  };

  {
    std::vector<Index> positions;
    positions.reserve(sample.size());
    for (const Index j : sample.indices) positions.push_back(position.at(j));
    absorb(landmark_rows, positions);
  }

  std::vector<Index> block_rows;
  std::vector<Index> block_positions;
  auto flush = [&] {
    if (block_rows.empty()) return;
    absorb(kernel_block(spec, data, block_rows, sample.indices, counter), block_positions);
    block_rows.clear();
    block_positions.clear();
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (is_landmark[i]) continue;
    block_rows.push_back(rows[i]);
    block_positions.push_back(static_cast<Index>(i));
    if (static_cast<Index>(block_rows.size()) == kRowBlock) flush();
  }
  flush();

  RidgeScores out;
  out.lambda = lambda;
  out.scores = ((diag - projected).array().max(0.0) * (multiplier / lambda)).matrix();
  return out;
}

struct RecursionContext {
  const KernelSpec& spec;
  const Dataset& data;
  const SamplerConfig& config;
  EvalCounter& counter;
  std::vector<LevelTrace>* trace;
  bool fixed_size;
  double lambda;       // fixed lambda
  std::size_t size;    // fixed size target
  std::size_t cap;     // accelerated target for recursive calls (0: none)
  double size_constant;
};

std::size_t level_target(const RecursionContext& ctx, std::size_t depth) {
  if (!ctx.fixed_size) return 0;
  if (depth > 0 && ctx.cap > 0) return std::min(ctx.size, ctx.cap);
  return ctx.size;
}

std::size_t level_threshold(const RecursionContext& ctx, std::size_t target, double delta) {
  if (ctx.config.base_case_threshold) return *ctx.config.base_case_threshold;
  if (ctx.config.theory()) {
    if (ctx.fixed_size) return target;
    return static_cast<std::size_t>(std::ceil(192.0 * std::log(1.0 / delta)));
  }
  return ctx.fixed_size ? 2 * target : 256;
}

// Half subset with each point kept independently with probability 1/2. The
// draw is repeated until it is a nonempty strict subset.
std::vector<Index> half_subset(std::span<const Index> points, std::uint64_t seed) {
  for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
    std::mt19937_64 rng(mix_seed(seed, attempt));
    std::vector<Index> out;
    out.reserve(points.size() / 2 + 1);
    for (const Index p : points) {
      if (uniform01(rng) < 0.5) out.push_back(p);
    }
    if (!out.empty() && out.size() < points.size()) return out;
  }
  std::vector<Index> out;
  for (std::size_t i = 0; i < points.size(); i += 2) out.push_back(points[i]);
  return out;
}

LandmarkSample recurse(const RecursionContext& ctx, std::vector<Index> points, std::size_t depth,
                       double delta) {
  const std::uint64_t level_seed = mix_seed(ctx.config.seed, depth);
  const std::size_t m = points.size();
  const std::size_t target = level_target(ctx, depth);

  LevelTrace level;
  level.depth = depth;
  level.points = m;
  level.target = target;
  level.delta = delta;

  if (m <= level_threshold(ctx, target, delta)) {
    LandmarkSample out;
    out.indices = std::move(points);
    out.probabilities.assign(m, 1.0);
    out.weights.assign(m, 1.0);
    level.base_case = true;
    level.selected = m;
    level.probability_sum = static_cast<double>(m);
    if (ctx.trace) ctx.trace->push_back(level);
    return out;
  }

  const auto subset = half_subset(points, mix_seed(level_seed, 1));
  const LandmarkSample child = recurse(ctx, subset, depth + 1, delta / 3.0);

  const std::uint64_t before = ctx.counter.count();
  SamplerConfig level_config = ctx.config;
  level_config.delta = delta;
  ProbabilityTarget prob_target;
  LambdaRule rule;
  double multiplier = 1.5;
  if (ctx.fixed_size) {
    const std::size_t k = rank_for_size(target, ctx.size_constant, delta);
    level.rank_target = k;
    prob_target.k = k;
    prob_target.budget = static_cast<double>(target);
    if (ctx.config.theory()) level_config.mode = SamplerMode::TheoryFixedSize;
    multiplier = 5.0;
    rule = [k](const Matrix& gram) {
      double lambda = tail_lambda(gram, k);
      if (!(lambda > 0.0)) {
        const double trace = gram.trace();
        if (!(trace > 0.0)) throw DegenerateError("sample Gram matrix has zero trace");
        lambda = std::numeric_limits<double>::epsilon() * trace / static_cast<double>(k);
      }
      return lambda;
    };
  } else {
    if (ctx.config.theory()) level_config.mode = SamplerMode::TheoryFixedLambda;
    const double lambda = ctx.lambda;
    rule = [lambda](const Matrix&) { return lambda; };
  }

  RidgeScores scores;
  Vector p;
  LandmarkSample local;
  try {
    scores = compute_scores(ctx.spec, ctx.data, points, child, rule, multiplier, ctx.counter);
    p = probabilities(scores, level_config, prob_target);
    local = bernoulli_select(p, mix_seed(level_seed, 2));
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + " (recursion depth " + std::to_string(depth) + ")");
  } catch (const EmptySampleError& e) {
    throw EmptySampleError(std::string(e.what()) + " (recursion depth " + std::to_string(depth) + ")");
  } catch (const DegenerateError& e) {
    throw DegenerateError(std::string(e.what()) + " (recursion depth " + std::to_string(depth) + ")");
  }

  LandmarkSample out;
  out.indices.reserve(local.size());
  for (const Index pos : local.indices) out.indices.push_back(points[static_cast<std::size_t>(pos)]);
  out.probabilities = std::move(local.probabilities);
  out.weights = std::move(local.weights);

  level.sample_in = child.size();
  level.lambda = scores.lambda;
  level.score_sum = scores.scores.sum();
  level.probability_sum = p.sum();
  level.selected = out.size();
  level.kernel_evals = ctx.counter.count() - before;
  if (ctx.trace) ctx.trace->push_back(level);
  return out;
}

std::vector<Index> all_points(Index n) {
  std::vector<Index> points(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) points[static_cast<std::size_t>(i)] = i;
  return points;
}

void finish_trace(SamplerTrace* trace, std::vector<LevelTrace>& levels) {
  if (!trace) return;
  std::sort(levels.begin(), levels.end(), [](const auto& a, const auto& b) { return a.depth < b.depth; });
  trace->levels = std::move(levels);
}

}  // namespace

LandmarkSample LandmarkSample::identity(Index n) {
  LandmarkSample out;
  out.indices = all_points(n);
  out.probabilities.assign(static_cast<std::size_t>(n), 1.0);
  out.weights.assign(static_cast<std::size_t>(n), 1.0);
  return out;
}

std::string LandmarkSample::to_csv() const {
  std::ostringstream out;
  out << "index,probability,weight\n";
  for (std::size_t j = 0; j < indices.size(); ++j) {
    out << indices[j] << ',' << fmt(probabilities[j]) << ',' << fmt(weights[j]) << '\n';
  }
  return out.str();
}

LandmarkSample LandmarkSample::from_csv(const std::string& text) {
  const Dataset table = parse_csv(text);
  if (table.d() != 3) throw FormatError("sample file must have columns index,probability,weight");
  LandmarkSample out;
  for (Index i = 0; i < table.n(); ++i) {
    const double idx = table.features(i, 0);
    if (idx < 0 || idx != std::floor(idx)) throw FormatError("sample index must be a nonnegative integer");
    out.indices.push_back(static_cast<Index>(idx));
    out.probabilities.push_back(table.features(i, 1));
    out.weights.push_back(table.features(i, 2));
  }
  return out;
}

std::string to_string(SamplerMode mode) {
  switch (mode) {
    case SamplerMode::TheoryFixedLambda: return "theory_fixed_lambda";
    case SamplerMode::TheoryFixedSize: return "theory_fixed_size";
    case SamplerMode::Practical: return "practical";
  }
  return "practical";
}

SamplerMode parse_sampler_mode(const std::string& text) {
  if (text == "practical") return SamplerMode::Practical;
  if (text == "theory" || text == "theory_fixed_lambda") return SamplerMode::TheoryFixedLambda;
  if (text == "theory_fixed_size") return SamplerMode::TheoryFixedSize;
  throw ArgumentError("unknown sampler mode '" + text + "'");
}

void SamplerConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0 / 32.0)) throw ArgumentError("delta must lie in (0, 1/32)");
  if (oversampling_multiplier && !(*oversampling_multiplier > 0.0)) {
    throw ArgumentError("oversampling multiplier must be positive");
  }
  if (base_case_threshold && *base_case_threshold < 1) throw ArgumentError("base case threshold must be >= 1");
  if (size_constant && !(*size_constant > 0.0)) throw ArgumentError("size constant must be positive");
}

std::string SamplerConfig::serialize() const {
  std::ostringstream out;
  out << "mode=" << to_string(mode) << '\n';
  out << "delta=" << fmt(delta) << '\n';
  out << "oversampling_multiplier=" << (oversampling_multiplier ? fmt(*oversampling_multiplier) : "auto") << '\n';
  out << "accelerated=" << (accelerated ? "true" : "false") << '\n';
  out << "base_case_threshold="
      << (base_case_threshold ? std::to_string(*base_case_threshold) : std::string("auto")) << '\n';
  out << "size_constant=" << (size_constant ? fmt(*size_constant) : "auto") << '\n';
  out << "seed=" << seed << '\n';
  return out.str();
}

SamplerConfig SamplerConfig::parse(const std::string& text) {
  SamplerConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto number = [&](const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty()) {
      throw ParseError("config line " + std::to_string(line_no) + ": '" + key + "' is not numeric");
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line.erase(std::remove_if(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }),
               line.end());
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("config line " + std::to_string(line_no) + " is not key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "mode") {
      config.mode = parse_sampler_mode(value);
    } else if (key == "delta") {
      config.delta = number(key, value);
    } else if (key == "oversampling_multiplier") {
      config.oversampling_multiplier =
          value == "auto" ? std::nullopt : std::optional<double>(number(key, value));
    } else if (key == "accelerated") {
      if (value != "true" && value != "false") throw ParseError("accelerated must be true or false");
      config.accelerated = value == "true";
    } else if (key == "base_case_threshold") {
      config.base_case_threshold =
          value == "auto" ? std::nullopt
                          : std::optional<std::size_t>(static_cast<std::size_t>(number(key, value)));
    } else if (key == "size_constant") {
      config.size_constant = value == "auto" ? std::nullopt : std::optional<double>(number(key, value));
    } else if (key == "seed") {
      try {
        std::size_t used = 0;
        config.seed = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw ParseError("config line " + std::to_string(line_no) + ": seed is not an unsigned integer");
      }
    } else {
      throw FormatError("unknown config key '" + key + "'");
    }
  }
  config.validate();
  return config;
}

std::uint64_t SamplerTrace::total_kernel_evals() const {
  std::uint64_t total = 0;
  for (const auto& l : levels) total += l.kernel_evals;
  return total;
}

RidgeScores scores_on_subset(const KernelSpec& spec, const Dataset& data, std::span<const Index> rows,
                             const LandmarkSample& sample, double lambda, double score_multiplier,
                             EvalCounter& counter) {
  if (!(lambda > 0.0)) throw ArgumentError("lambda must be positive");
  return compute_scores(spec, data, rows, sample, [lambda](const Matrix&) { return lambda; },
                        score_multiplier, counter);
}

RidgeScores scores_from_sample(const KernelSpec& spec, const Dataset& data, const LandmarkSample& sample,
                               double lambda, double score_multiplier, EvalCounter& counter) {
  const auto rows = all_points(data.n());
  return scores_on_subset(spec, data, rows, sample, lambda, score_multiplier, counter);
}

double multiplier_for_budget(const Vector& scores, double budget) {
  if (!(budget > 0.0)) throw ArgumentError("sample budget must be positive");
  std::vector<double> positive;
  for (Index i = 0; i < scores.size(); ++i) {
    if (scores(i) > 0.0) positive.push_back(scores(i));
  }
  if (positive.empty()) throw DegenerateError("all ridge scores are zero");
  std::sort(positive.begin(), positive.end(), std::greater<>());
  if (static_cast<double>(positive.size()) <= budget) return 1.0 / positive.back();

  std::vector<double> suffix(positive.size() + 1, 0.0);
  for (std::size_t i = positive.size(); i-- > 0;) suffix[i] = suffix[i + 1] + positive[i];
  // Top t entries clamp to 1; the rest scale linearly.
  for (std::size_t t = 0; t < positive.size(); ++t) {
    const double m = (budget - static_cast<double>(t)) / suffix[t];
    if (m * positive[t] <= 1.0) return m;
  }
  return 1.0 / positive.back();
}

Vector probabilities(const RidgeScores& scores, const SamplerConfig& config, const ProbabilityTarget& target) {
  if (!scores.scores.allFinite()) throw ArgumentError("ridge scores must be finite");
  const double total = scores.scores.sum();
  if (!(total > 0.0)) throw DegenerateError("sum of ridge scores is not positive");

  double factor = 0.0;
  switch (config.mode) {
    case SamplerMode::TheoryFixedLambda:
      factor = 16.0 * std::log(total / config.delta);
      break;
    case SamplerMode::TheoryFixedSize:
      if (target.k < 1) throw ArgumentError("fixed-size probabilities require k >= 1");
      factor = 16.0 * std::log(2.0 * static_cast<double>(target.k) / config.delta);
      break;
    case SamplerMode::Practical:
      if (config.oversampling_multiplier) {
        factor = *config.oversampling_multiplier;
      } else if (target.budget) {
        factor = multiplier_for_budget(scores.scores, *target.budget);
      } else {
        factor = std::log(total / config.delta);
      }
      break;
  }
  return (scores.scores.array() * factor).max(0.0).min(1.0).matrix();
}

LandmarkSample bernoulli_select(const Vector& probabilities, std::uint64_t seed) {
  for (Index i = 0; i < probabilities.size(); ++i) {
    const double p = probabilities(i);
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("probabilities must lie in [0, 1]");
  }
  if (probabilities.size() == 0 || probabilities.maxCoeff() <= 0.0) {
    throw EmptySampleError("all sampling probabilities are zero");
  }
  for (int attempt = 0; attempt <= kEmptyDrawRetries; ++attempt) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt));
    LandmarkSample out;
    for (Index i = 0; i < probabilities.size(); ++i) {
      const double p = probabilities(i);
      if (uniform01(rng) < p) {
        out.indices.push_back(i);
        out.probabilities.push_back(p);
        out.weights.push_back(1.0 / std::sqrt(p));
      }
    }
    if (!out.empty()) return out;
  }
  throw EmptySampleError("Bernoulli sampling returned no landmarks in " +
                         std::to_string(kEmptyDrawRetries + 1) + " draws");
}

LandmarkSample recursive_rls_fixed_lambda(const KernelSpec& spec, const Dataset& data, double lambda,
                                          const SamplerConfig& config, EvalCounter& counter,
                                          SamplerTrace* trace) {
  config.validate();
  data.validate();
  if (!(lambda > 0.0)) throw ArgumentError("lambda must be positive");
  if (config.accelerated) throw ArgumentError("acceleration applies to the fixed-size sampler only");
  std::vector<LevelTrace> levels;
  const RecursionContext ctx{spec, data, config, counter, trace ? &levels : nullptr, false, lambda, 0, 0, 0.0};
  auto out = recurse(ctx, all_points(data.n()), 0, config.delta);
  finish_trace(trace, levels);
  return out;
}

LandmarkSample recursive_rls_fixed_size(const KernelSpec& spec, const Dataset& data, std::size_t s,
                                        const SamplerConfig& config, EvalCounter& counter,
                                        SamplerTrace* trace) {
  config.validate();
  data.validate();
  if (s < 1) throw ArgumentError("sample size must be >= 1");
  const double c = config.size_constant.value_or(config.theory() ? 384.0 : 4.0);
  const std::size_t n = static_cast<std::size_t>(data.n());
  const std::size_t cap = config.accelerated ? accelerated_cap(n, s) : 0;
  std::vector<LevelTrace> levels;
  const RecursionContext ctx{spec, data, config, counter, trace ? &levels : nullptr, true, 0.0, s, cap, c};
  auto out = recurse(ctx, all_points(data.n()), 0, config.delta);
  finish_trace(trace, levels);
  return out;
}

std::size_t accelerated_cap(std::size_t n, std::size_t s) {
  if (n < 1 || s < 1) throw ArgumentError("accelerated cap requires n, s >= 1");
  const long double ns = static_cast<long double>(n);
  const long double ss = static_cast<long double>(s);
  const long double value = std::sqrt((ns * ss + ss * ss * ss) / ns);
  return static_cast<std::size_t>(std::ceil(value - 1e-12L));
}

std::size_t rank_for_size(std::size_t s, double c, double delta) {
  if (!(c > 0.0) || !(delta > 0.0 && delta < 1.0)) throw ArgumentError("invalid size constant or delta");
  auto cost = [&](std::size_t k) {
    const double kk = static_cast<double>(k);
    return c * kk * std::log(2.0 * kk / delta);
  };
  std::size_t k = 1;
  while (cost(k + 1) <= static_cast<double>(s)) ++k;
  return k;
}

double tail_lambda(const Matrix& gram, std::size_t k) {
  if (k < 1) throw ArgumentError("tail lambda requires k >= 1");
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
  std::vector<double> values(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
  for (auto& v : values) v = std::abs(v);
  std::sort(values.begin(), values.end(), std::greater<>());
  double tail = 0.0;
  for (std::size_t i = k; i < values.size(); ++i) tail += values[i];
  return tail / static_cast<double>(k);
}

namespace detail {

Eigen::LLT<Matrix> jittered_cholesky(const Matrix& a, double scale) {
  Eigen::LLT<Matrix> llt(a);
  double jitter = scale * 1e-12;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    if (attempt > 0) {
      Matrix shifted = a;
      shifted.diagonal().array() += jitter;
      llt.compute(shifted);
      jitter *= 10.0;
    }
    if (llt.info() == Eigen::Success && llt.matrixLLT().allFinite()) return llt;
  }
  throw NumericalError("regularized sample Gram matrix is not positive definite after " +
                       std::to_string(3) + " jitter retries");
}

}  // namespace detail

}  // namespace rrls
