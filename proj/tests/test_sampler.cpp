#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "rrls/oracle.hpp"
#include "rrls/sampler.hpp"
#include "rrls/synthetic.hpp"

using namespace rrls;

namespace {

LandmarkSample unit_sample(const std::vector<Index>& indices) {
  LandmarkSample s;
  s.indices = indices;
  s.probabilities.assign(indices.size(), 1.0);
  s.weights.assign(indices.size(), 1.0);
  return s;
}

Dataset clustered(Index n, std::uint64_t seed) {
  return clustered_gaussian(dominant_cluster_spec(n, 3, 10, 0.9, 10.0, 1.0, 0.3), seed);
}

}  // namespace

TEST_CASE("full unit sample reproduces the exact ridge scores") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Index n = seed % 2 == 0 ? 50 : 200;
    const Dataset data = test::gaussian_data(n, 3, seed);
    const KernelSpec spec = seed < 3 ? KernelSpec::gaussian(1.5) : KernelSpec::linear();
    const DenseKernel k = DenseKernel::from_data(spec, data);
    for (double lambda : {1e-2, 1.0, 10.0}) {
      EvalCounter counter;
      const RidgeScores approx =
          scores_from_sample(spec, data, LandmarkSample::identity(n), lambda, 1.0, counter);
      const Vector exact = exact_ridge_scores(k, lambda);
      CHECK((approx.scores - exact).norm() <= 1e-8 * exact.norm());
      CHECK(counter.count() == static_cast<std::uint64_t>(n * n + n));
      CHECK(approx.lambda == lambda);
    }
  }
}

TEST_CASE("identity kernel gives score one half at unit ridge") {
  const Dataset data = test::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  EvalCounter counter;
  const RidgeScores r = scores_from_sample(KernelSpec::linear(), data, LandmarkSample::identity(3), 1.0, 1.0, counter);
  for (Index i = 0; i < 3; ++i) CHECK(r.scores(i) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("two-point Gram matrix with off-diagonal one half") {
  const Dataset data = test::from_rows({{1.0, 0.0}, {0.5, std::sqrt(0.75)}});
  EvalCounter counter;
  const RidgeScores r = scores_from_sample(KernelSpec::linear(), data, LandmarkSample::identity(2), 0.5, 1.0, counter);
  CHECK(r.scores(0) == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(r.scores(1) == doctest::Approx(0.625).epsilon(1e-12));
}

TEST_CASE("partial samples cost n s + n evaluations and scale with the multiplier") {
  const Dataset data = test::gaussian_data(80, 2, 3);
  const KernelSpec spec = KernelSpec::gaussian(1.0);
  const LandmarkSample sample = unit_sample({1, 5, 9, 40, 79});
  EvalCounter counter;
  const RidgeScores one = scores_from_sample(spec, data, sample, 0.1, 1.0, counter);
  CHECK(counter.count() == 80 * 5 + 80);
  const RidgeScores three = scores_from_sample(spec, data, sample, 0.1, 3.0, counter);
  CHECK((three.scores - 3.0 * one.scores).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(one.scores.minCoeff() >= 0.0);
}

TEST_CASE("score estimation rejects bad inputs") {
  const Dataset data = test::gaussian_data(10, 2, 3);
  EvalCounter counter;
  const KernelSpec spec = KernelSpec::gaussian(1.0);
  CHECK_THROWS_AS(scores_from_sample(spec, data, LandmarkSample::identity(10), 0.0, 1.0, counter), ArgumentError);
  CHECK_THROWS_AS(scores_from_sample(spec, data, LandmarkSample::identity(10), -1.0, 1.0, counter), ArgumentError);
  CHECK_THROWS_AS(scores_from_sample(spec, data, LandmarkSample{}, 1.0, 1.0, counter), ArgumentError);
}

TEST_CASE("scores on a subset only touch the listed rows") {
  const Dataset data = test::gaussian_data(30, 2, 4);
  const KernelSpec spec = KernelSpec::gaussian(1.0);
  const std::vector<Index> rows{0, 3, 6, 9, 12};
  EvalCounter counter;
  const RidgeScores r = scores_on_subset(spec, data, rows, unit_sample({3, 9}), 0.5, 1.0, counter);
  CHECK(r.scores.size() == 5);
  CHECK(counter.count() == 5 * 2 + 5);
  CHECK_THROWS_AS(scores_on_subset(spec, data, rows, unit_sample({4}), 0.5, 1.0, counter), ArgumentError);
}

TEST_CASE("probability rules per mode") {
  SamplerConfig practical;
  practical.oversampling_multiplier = 2.0;
  RidgeScores r;
  r.scores = Vector::Ones(4) * 1.5;
  CHECK(probabilities(r, practical) == Vector::Ones(4));

  r.scores = (Vector(2) << 0.1, 0.6).finished();
  const Vector p = probabilities(r, practical);
  CHECK(p(0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(p(1) == 1.0);

  SamplerConfig theory;
  theory.mode = SamplerMode::TheoryFixedLambda;
  theory.delta = 0.02;
  r.scores = (Vector(3) << 1e-4, 2e-3, 5e-2).finished();
  const Vector pt = probabilities(r, theory);
  const double total = 1e-4 + 2e-3 + 5e-2;
  for (Index i = 0; i < 3; ++i) {
    const double expect = std::min(1.0, r.scores(i) * 16.0 * std::log(total / 0.02));
    CHECK(std::abs(pt(i) - expect) <= 1e-12);
  }

  SamplerConfig fixed_size;
  fixed_size.mode = SamplerMode::TheoryFixedSize;
  const Vector ps = probabilities(r, fixed_size, ProbabilityTarget{7, std::nullopt});
  for (Index i = 0; i < 3; ++i) {
    CHECK(std::abs(ps(i) - std::min(1.0, r.scores(i) * 16.0 * std::log(14.0 / 0.01))) <= 1e-12);
  }
  CHECK_THROWS_AS(probabilities(r, fixed_size), ArgumentError);

  r.scores = Vector::Zero(3);
  CHECK_THROWS_AS(probabilities(r, practical), DegenerateError);
}

TEST_CASE("budget multiplier meets the expected size") {
  const Vector scores = (Vector(6) << 0.9, 0.5, 0.2, 0.1, 0.05, 0.0).finished();
  for (double budget : {0.5, 1.0, 2.0, 3.5, 4.9}) {
    const double m = multiplier_for_budget(scores, budget);
    CHECK((scores.array() * m).min(1.0).sum() == doctest::Approx(budget).epsilon(1e-12));
  }
  // More than the positive count: every positive score is taken.
  const double all = multiplier_for_budget(scores, 10.0);
  CHECK((scores.array() * all).min(1.0).sum() == doctest::Approx(5.0));
  SamplerConfig config;
  RidgeScores r{scores, 1.0};
  CHECK(probabilities(r, config, ProbabilityTarget{0, 2.0}).sum() == doctest::Approx(2.0));
}

TEST_CASE("Bernoulli selection edge cases and weights") {
  const LandmarkSample all = bernoulli_select(Vector::Ones(12), 3);
  CHECK(all.size() == 12);
  CHECK(std::all_of(all.weights.begin(), all.weights.end(), [](double w) { return w == 1.0; }));
  CHECK_THROWS_AS(bernoulli_select(Vector::Zero(12), 3), EmptySampleError);
  CHECK_THROWS_AS(bernoulli_select(Vector::Constant(3, 1.5), 3), ArgumentError);

  const LandmarkSample half = bernoulli_select(Vector::Constant(200, 0.25), 8);
  for (std::size_t j = 0; j < half.size(); ++j) {
    CHECK(half.weights[j] == doctest::Approx(2.0));
    if (j > 0) CHECK(half.indices[j] > half.indices[j - 1]);
  }
  // A tiny probability almost always draws empty; the retries eventually stop.
  CHECK_THROWS_AS(bernoulli_select(Vector::Constant(1, 1e-300), 0), EmptySampleError);
}

TEST_CASE("Bernoulli sample size falls in the half-to-double window") {
  const Vector p = Vector::Constant(10000, 0.5);
  int inside = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto size = static_cast<double>(bernoulli_select(p, seed).size());
    if (size >= 2500.0 && size <= 10000.0) ++inside;
  }
  CHECK(inside >= 99);
}

TEST_CASE("fixed-lambda recursion: base case, determinism and trace structure") {
  const Dataset small = test::gaussian_data(40, 2, 1);
  SamplerConfig config;
  config.seed = 11;
  EvalCounter counter;
  const LandmarkSample base = recursive_rls_fixed_lambda(KernelSpec::gaussian(1.0), small, 0.1, config, counter);
  CHECK(base.size() == 40);
  CHECK(counter.count() == 0);

  const Dataset data = clustered(3000, 5);
  const KernelSpec spec = KernelSpec::gaussian(1.0);
  SamplerTrace trace;
  EvalCounter c1;
  const LandmarkSample a = recursive_rls_fixed_lambda(spec, data, 1.0, config, c1, &trace);
  EvalCounter c2;
  const LandmarkSample b = recursive_rls_fixed_lambda(spec, data, 1.0, config, c2);
  CHECK(a.indices == b.indices);
  CHECK(a.weights == b.weights);
  CHECK(c1.count() == c2.count());
  CHECK(c1.count() == trace.total_kernel_evals());

  REQUIRE(trace.depth() >= 2);
  CHECK(trace.depth() <= static_cast<std::size_t>(std::ceil(std::log2(3000.0))) + 1);
  for (std::size_t i = 0; i + 1 < trace.levels.size(); ++i) {
    CHECK(trace.levels[i].points > trace.levels[i + 1].points);
  }
  CHECK(trace.levels.back().base_case);
  CHECK(trace.levels.front().selected == a.size());
  for (double w : a.weights) CHECK(w >= 1.0);

  config.seed = 12;
  EvalCounter c3;
  CHECK(recursive_rls_fixed_lambda(spec, data, 1.0, config, c3).indices != a.indices);
}

TEST_CASE("fixed-lambda output size stays within the probability window") {
  const Dataset data = clustered(1500, 2);
  const KernelSpec spec = KernelSpec::gaussian(1.0);
  int inside = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    SamplerConfig config;
    config.seed = seed;
    SamplerTrace trace;
    EvalCounter counter;
    const auto s = static_cast<double>(recursive_rls_fixed_lambda(spec, data, 0.5, config, counter, &trace).size());
    const double sum = trace.levels.front().probability_sum;
    if (s >= 0.5 * sum && s <= 2.0 * sum) ++inside;
  }
  CHECK(inside >= 38);
}

TEST_CASE("fixed-lambda recursion rejects acceleration and bad ridge") {
  const Dataset data = test::gaussian_data(500, 2, 1);
  SamplerConfig config;
  EvalCounter counter;
  CHECK_THROWS_AS(recursive_rls_fixed_lambda(KernelSpec::gaussian(1.0), data, 0.0, config, counter), ArgumentError);
  config.accelerated = true;
  CHECK_THROWS_AS(recursive_rls_fixed_lambda(KernelSpec::gaussian(1.0), data, 1.0, config, counter), ArgumentError);
}

TEST_CASE("scores from a ridge-leverage sample overestimate the exact scores") {
  const Dataset data = clustered(400, 9);
  const KernelSpec spec = KernelSpec::gaussian(1.0);
  const DenseKernel k = DenseKernel::from_data(spec, data);
  const double lambda = lambda_for_k(k, 10);
  const Vector exact = exact_ridge_scores(k, lambda);
  const double factor = 16.0 * std::log(exact.sum() / 0.01);
  const Vector p = (exact.array() * factor).min(1.0).matrix();
  int holds = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    EvalCounter counter;
    const LandmarkSample sample = bernoulli_select(p, seed);
    const RidgeScores r = scores_from_sample(spec, data, sample, lambda, 1.5, counter);
    if ((r.scores - exact).minCoeff() >= -1e-8) ++holds;
  }
  CHECK(holds >= 95);
}

TEST_CASE("unweighted subsets never overestimate and shrink the effective dimension") {
  const Dataset data = test::gaussian_data(150, 3, 17);
  const KernelSpec spec = KernelSpec::gaussian(1.0);
  const DenseKernel k = DenseKernel::from_data(spec, data);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LandmarkSample picked = bernoulli_select(Vector::Constant(150, 0.3), seed);
    const LandmarkSample sample = unit_sample(picked.indices);
    for (double lambda : {0.05, 1.0}) {
      EvalCounter counter;
      const Vector approx = scores_from_sample(spec, data, sample, lambda, 1.0, counter).scores;
      CHECK((approx - exact_ridge_scores(k, lambda)).minCoeff() >= -1e-8);

      const auto m = static_cast<Index>(sample.size());
      Matrix sub(m, m);
      for (Index a = 0; a < m; ++a) {
        for (Index b = 0; b < m; ++b) sub(a, b) = k.matrix()(sample.indices[a], sample.indices[b]);
      }
      CHECK(exact_deff(DenseKernel(sub), lambda) <= exact_deff(k, lambda) + 1e-6);
    }
  }
}

TEST_CASE("fixed-size recursion: base case and identity") {
  const Dataset data = test::gaussian_data(50, 2, 4);
  SamplerConfig config;
  EvalCounter counter;
  const LandmarkSample out = recursive_rls_fixed_size(KernelSpec::gaussian(1.0), data, 100, config, counter);
  CHECK(out.size() == 50);
  CHECK(out.indices.front() == 0);
  CHECK(out.indices.back() == 49);
  CHECK_THROWS_AS(recursive_rls_fixed_size(KernelSpec::gaussian(1.0), data, 0, config, counter), ArgumentError);
}

TEST_CASE("tail lambda sums the trailing eigenvalues") {
  const Matrix gram = (Vector(2) << 3.0, 1.0).finished().asDiagonal();
  CHECK(tail_lambda(gram, 1) == doctest::Approx(1.0));
  CHECK(tail_lambda(gram, 1) == doctest::Approx(lambda_for_k(DenseKernel(gram), 1)));
  CHECK(tail_lambda(gram, 2) == 0.0);
  CHECK(tail_lambda(gram, 5) == 0.0);  // missing trailing values count as zero
  CHECK_THROWS_AS(tail_lambda(gram, 0), ArgumentError);
}

TEST_CASE("fixed-size recursion keeps the returned size near the request") {
  const Dataset data = clustered(3000, 3);
  const KernelSpec spec = KernelSpec::gaussian(1.0);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    SamplerConfig config;
    config.seed = seed;
    EvalCounter counter;
    SamplerTrace trace;
    const auto s = recursive_rls_fixed_size(spec, data, 100, config, counter, &trace).size();
    if (s <= 200) ++ok;
    CHECK(counter.count() == trace.total_kernel_evals());
    CHECK(trace.levels.front().target == 100);
  }
  CHECK(ok >= 7);
}

TEST_CASE("fixed-size recursion handles an exactly low-rank input") {
  Dataset same;
  same.features = RowMatrix::Constant(400, 2, 0.3);
  SamplerConfig config;
  EvalCounter counter;
  const LandmarkSample out = recursive_rls_fixed_size(KernelSpec::gaussian(1.0), same, 20, config, counter);
  CHECK_FALSE(out.empty());

  Dataset zeros;
  zeros.features = RowMatrix::Zero(400, 2);
  CHECK_THROWS_AS(recursive_rls_fixed_size(KernelSpec::linear(), zeros, 20, config, counter), DegenerateError);
}

TEST_CASE("accelerated fixed-size runs cap the recursive targets") {
  const Dataset data = clustered(4000, 8);
  SamplerConfig config;
  config.accelerated = true;
  EvalCounter counter;
  SamplerTrace trace;
  const LandmarkSample out = recursive_rls_fixed_size(KernelSpec::gaussian(1.0), data, 200, config, counter, &trace);
  CHECK_FALSE(out.empty());
  const std::size_t cap = accelerated_cap(4000, 200);
  REQUIRE(trace.depth() >= 2);
  CHECK(trace.levels.front().target == 200);
  for (std::size_t i = 1; i < trace.levels.size(); ++i) CHECK(trace.levels[i].target <= cap);
}

TEST_CASE("accelerated cap arithmetic") {
  CHECK(accelerated_cap(1000000, 1000) == 45);
  CHECK(accelerated_cap(7, 1) >= 1);
  CHECK(accelerated_cap(7, 1) <= 2);
  CHECK(accelerated_cap(10, 10) == static_cast<std::size_t>(std::ceil(std::sqrt(110.0))));
  CHECK_THROWS_AS(accelerated_cap(0, 3), ArgumentError);
}

TEST_CASE("rank for a sample size") {
  CHECK(rank_for_size(50, 4.0, 0.01) == 2);
  CHECK(rank_for_size(1, 384.0, 0.01) == 1);
  const std::size_t k = rank_for_size(2000, 4.0, 0.01);
  CHECK(4.0 * k * std::log(2.0 * k / 0.01) <= 2000.0);
  CHECK(4.0 * (k + 1) * std::log(2.0 * (k + 1) / 0.01) > 2000.0);
}

TEST_CASE("sampler configuration validates and round-trips") {
  SamplerConfig config;
  CHECK_NOTHROW(config.validate());
  config.delta = 1.0 / 32.0;
  CHECK_THROWS_AS(config.validate(), ArgumentError);
  config.delta = 0.0;
  CHECK_THROWS_AS(config.validate(), ArgumentError);
  config.delta = 0.02;
  config.base_case_threshold = 0;
  CHECK_THROWS_AS(config.validate(), ArgumentError);
  config.base_case_threshold = 64;
  config.oversampling_multiplier = 3.5;
  config.mode = SamplerMode::TheoryFixedSize;
  config.accelerated = true;
  config.seed = 1234567890123ULL;
  const SamplerConfig back = SamplerConfig::parse(config.serialize());
  CHECK(back.serialize() == config.serialize());
  CHECK(back.seed == config.seed);
  CHECK(back.base_case_threshold == 64u);
  CHECK_FALSE(SamplerConfig::parse(SamplerConfig{}.serialize()).size_constant.has_value());
  CHECK_THROWS_AS(SamplerConfig::parse("colour=blue\n"), FormatError);
  CHECK(parse_sampler_mode(to_string(SamplerMode::TheoryFixedLambda)) == SamplerMode::TheoryFixedLambda);
  CHECK_THROWS_AS(parse_sampler_mode("fast"), ArgumentError);
}

TEST_CASE("landmark samples round-trip through csv") {
  const LandmarkSample sample = bernoulli_select(Vector::Constant(50, 0.3), 6);
  const LandmarkSample back = LandmarkSample::from_csv(sample.to_csv());
  CHECK(back.indices == sample.indices);
  CHECK(back.probabilities == sample.probabilities);
  CHECK(back.weights == sample.weights);
  const LandmarkSample id = LandmarkSample::identity(4);
  CHECK(id.indices == std::vector<Index>{0, 1, 2, 3});
}
