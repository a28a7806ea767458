#include "rrls/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <random>
#include <sstream>

#include "rrls/baselines.hpp"
#include "rrls/downstream.hpp"
#include "rrls/nystrom.hpp"
#include "rrls/oracle.hpp"
#include "rrls/sampler.hpp"
#include "rrls/synthetic.hpp"

namespace rrls {

namespace {

// Pinned tolerances.
constexpr double kScoreIdentityTol = 1e-8;   // normwise relative, sup norm
constexpr double kDeffSumTol = 1e-10;        // absolute
constexpr double kTailBoundSlack = 1e-8;     // absolute, on 2k
constexpr double kPsdSlack = 1e-8;           // relative to ||K||_2
constexpr double kDoublingGrowth = 1.25;     // eval ratio growth per doubling of n
constexpr double kUniformGap = 2.0;          // uniform / rls median error at the smallest s
constexpr double kPcpEpsilon = 0.5;
constexpr double kPcpFraction = 0.9;
constexpr double kKrrTol = 1e-6;             // relative, 2-norm
constexpr double kEigenSlack = 1e-8;         // absolute
constexpr double kAcceleratedSaving = 2.0;   // min eval reduction
constexpr double kAcceleratedDegrade = 1.5;  // max median error ratio
constexpr std::size_t kLanczosSteps = 120;

bool full(Tier tier) { return tier == Tier::Full; }

std::string fmt(double v, int precision = 4) {
  std::ostringstream ss;
  ss << std::setprecision(precision) << v;
  return ss.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

Dataset normal_data(Index n, Index d, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Dataset out;
  out.features.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) out.features(i, j) = scale * normal(rng);
  }
  return out;
}

Dataset take_rows(const Dataset& data, const std::vector<Index>& rows) {
  Dataset out;
  out.features.resize(static_cast<Index>(rows.size()), data.d());
  for (std::size_t i = 0; i < rows.size(); ++i) out.features.row(static_cast<Index>(i)) = data.features.row(rows[i]);
  return out;
}

Matrix take_rows(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

double sup_relative(const Vector& a, const Vector& b) {
  return (a - b).lpNorm<Eigen::Infinity>() / std::max(b.lpNorm<Eigen::Infinity>(), 1e-300);
}

KernelSpec gaussian(double sigma) { return KernelSpec::parse("gaussian:sigma=" + fmt(sigma, 17)); }

// ---- 1, 2: small random instances shared by the exact-identity checks -------

struct Instance {
  Dataset data;
  KernelSpec kernel;
  double lambda;
};

Instance score_instance(std::size_t i, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, i));
  const Index n = i % 2 ? 200 : 50;
  const Index d = 2 + static_cast<Index>(i % 5);
  Instance inst;
  inst.data = normal_data(n, d, rng());
  inst.kernel = (i / 2) % 2 ? KernelSpec::parse("linear") : gaussian(0.5 + 2.5 * uniform01(rng));
  // lambda on a log grid from 1e-2 to 1e1.
  const double t = count > 1 ? static_cast<double>(i) / static_cast<double>(count - 1) : 0.0;
  inst.lambda = std::pow(10.0, -2.0 + 3.0 * t);
  return inst;
}

std::size_t instance_count(Tier tier) { return full(tier) ? 50 : 10; }

CriterionResult c01(Tier tier, std::uint64_t seed) {
  const std::size_t count = instance_count(tier);
  double worst = 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const Instance inst = score_instance(i, count, seed);
    EvalCounter counter;
    const DenseKernel k = DenseKernel::from_data(inst.kernel, inst.data);
    const Vector exact = exact_ridge_scores(k, inst.lambda);
    const RidgeScores approx = scores_from_sample(inst.kernel, inst.data, LandmarkSample::identity(inst.data.n()),
                                                  inst.lambda, 1.0, counter);
    const double err = sup_relative(approx.scores, exact);
    worst = std::max(worst, err);
    if (err <= kScoreIdentityTol) ++ok;
  }
  return {1, "", ok == count,
          std::to_string(ok) + "/" + std::to_string(count) + " instances, worst relative error " + fmt(worst) +
              " (tol " + fmt(kScoreIdentityTol) + ")"};
}

CriterionResult c02(Tier tier, std::uint64_t seed) {
  const std::size_t count = instance_count(tier);
  double worst = 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const Instance inst = score_instance(i, count, seed);
    const DenseKernel k = DenseKernel::from_data(inst.kernel, inst.data);
    const double err = std::abs(exact_deff(k, inst.lambda) - exact_ridge_scores(k, inst.lambda).sum());
    worst = std::max(worst, err);
    if (err <= kDeffSumTol) ++ok;
  }
  return {2, "", ok == count,
          std::to_string(ok) + "/" + std::to_string(count) + " instances, worst |d_eff - sum| " + fmt(worst) +
              " (tol " + fmt(kDeffSumTol) + ")"};
}

// ---- 3: tail-average lambda bound on controlled spectra ---------------------

Vector decay_spectrum(std::size_t i, Index n, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, i));
  const double u = uniform01(rng);
  Vector ev(n);
  for (Index j = 0; j < n; ++j) {
    const double x = static_cast<double>(j);
    switch (i % 3) {
      case 0:  // geometric, ratio in [0.5, 0.99]
        ev(j) = std::pow(0.5 + 0.49 * u, x);
        break;
      case 1:  // polynomial, exponent in [0.5, 3]
        ev(j) = std::pow(x + 1.0, -(0.5 + 2.5 * u));
        break;
      default:  // flat head of 1..40 ones, then a small floor
        ev(j) = j < 1 + static_cast<Index>(39 * u) ? 1.0 : 1e-3;
        break;
    }
  }
  return ev;
}

CriterionResult c03(Tier tier, std::uint64_t seed) {
  const std::size_t count = instance_count(tier);
  const Index n = 200;
  std::size_t ok = 0;
  double worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    const DenseKernel k = spectrum_kernel(decay_spectrum(i, n, seed), mix_seed(seed, 1000 + i));
    bool pass = true;
    for (const Index rank : {1, 5, 20}) {
      try {
        const double lambda = lambda_for_k(k, rank);
        if (lambda > 0.0) {
          const double margin = exact_deff(k, lambda) - 2.0 * static_cast<double>(rank);
          worst_margin = std::max(worst_margin, margin);
          pass = pass && margin <= kTailBoundSlack;
        }
      } catch (const NumericalError&) {
        pass = false;
      }
    }
    if (pass) ++ok;
  }
  return {3, "", ok == count,
          std::to_string(ok) + "/" + std::to_string(count) + " spectra, max d_eff - 2k = " + fmt(worst_margin)};
}

// ---- 4: spectral guarantee of the fixed-lambda recursion in theory mode -----

CriterionResult c04(Tier tier, std::uint64_t seed) {
  const Index n = full(tier) ? 2000 : 600;
  const std::size_t trials = full(tier) ? 20 : 5;
  const std::size_t need = full(tier) ? 18 : 4;
  const auto spec = dominant_cluster_spec(n, 3, 10, 0.9, 10.0, 1.0, 0.3);
  const Dataset data = clustered_gaussian(spec, mix_seed(seed, 4));
  const KernelSpec kernel = gaussian(1.0);
  const DenseKernel k = DenseKernel::from_data(kernel, data);
  const double lambda = lambda_for_k(k, 25);
  const double norm = k.spectral_norm();

  struct Tally {
    std::size_t spectral_ok = 0, psd_ok = 0;
    double mean_size = 0.0, worst_ratio = 0.0;
  };
  // Theory constants usually keep every point at this scale, so the same
  // trials are repeated in practical mode for information; only the theory
  // run decides the verdict.
  auto run = [&](SamplerMode mode) {
    Tally tally;
    for (std::size_t t = 0; t < trials; ++t) {
      SamplerConfig config;
      config.mode = mode;
      config.seed = mix_seed(seed, 400 + t);
      EvalCounter counter;
      const LandmarkSample sample = recursive_rls_fixed_lambda(kernel, data, lambda, config, counter);
      const NystromFactors factors = build_factors(kernel, data, sample, counter);
      const Vector residual = residual_spectrum(k, factors.factor_rows());
      tally.mean_size += static_cast<double>(sample.size()) / static_cast<double>(trials);
      tally.worst_ratio = std::max(tally.worst_ratio, residual(0) / lambda);
      if (residual(0) <= lambda) ++tally.spectral_ok;
      if (residual(n - 1) >= -kPsdSlack * norm) ++tally.psd_ok;
    }
    return tally;
  };
  const Tally theory = run(SamplerMode::TheoryFixedLambda);
  const Tally practical = run(SamplerMode::Practical);
  const std::string of = "/" + std::to_string(trials);
  return {4, "", theory.spectral_ok >= need && theory.psd_ok == trials,
          "lambda " + fmt(lambda) + "; theory: lambda_max <= lambda in " + std::to_string(theory.spectral_ok) + of +
              " (need " + std::to_string(need) + "), PSD in " + std::to_string(theory.psd_ok) + of +
              ", worst lambda_max/lambda " + fmt(theory.worst_ratio) + ", mean s' " + fmt(theory.mean_size) +
              " of " + std::to_string(n) + "; practical (informational): " + std::to_string(practical.spectral_ok) +
              of + ", PSD " + std::to_string(practical.psd_ok) + of + ", worst ratio " + fmt(practical.worst_ratio) +
              ", mean s' " + fmt(practical.mean_size)};
}

// ---- 5: sample-size control of the fixed-size recursion ---------------------

CriterionResult c05(Tier tier, std::uint64_t seed) {
  const Index n = full(tier) ? 5000 : 2000;
  const std::size_t trials = full(tier) ? 20 : 5;
  const std::size_t need = full(tier) ? 18 : 4;
  const std::vector<std::size_t> sizes = full(tier) ? std::vector<std::size_t>{100, 300} : std::vector<std::size_t>{100};
  const Dataset data = clustered_gaussian(dominant_cluster_spec(n, 3, 10, 0.9, 10.0, 1.0, 0.3), mix_seed(seed, 5));
  const KernelSpec kernel = gaussian(1.0);
  bool pass = true;
  std::string detail;
  for (const std::size_t s : sizes) {
    std::size_t ok = 0;
    std::size_t largest = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      SamplerConfig config;
      config.seed = mix_seed(seed, 500 + 100 * s + t);
      EvalCounter counter;
      const std::size_t got = recursive_rls_fixed_size(kernel, data, s, config, counter).size();
      largest = std::max(largest, got);
      if (got <= 2 * s) ++ok;
    }
    pass = pass && ok >= need;
    detail += (detail.empty() ? "" : "; ") + std::string("s=") + std::to_string(s) + ": s' <= 2s in " +
              std::to_string(ok) + "/" + std::to_string(trials) + ", max s' " + std::to_string(largest);
  }
  return {5, "", pass, detail};
}

// ---- 6: kernel evaluations per n s' across doublings of n -------------------

CriterionResult c06(Tier tier, std::uint64_t seed) {
  const std::size_t s = full(tier) ? 200 : 50;
  const std::vector<Index> ns = full(tier) ? std::vector<Index>{4000, 8000, 16000} : std::vector<Index>{1000, 2000, 4000};
  const std::size_t seeds = full(tier) ? 3 : 2;
  const KernelSpec kernel = gaussian(1.0);
  std::vector<double> ratios;
  std::string detail;
  for (const Index n : ns) {
    const Dataset data = normal_data(n, 3, mix_seed(seed, 6));
    double ratio = 0.0;
    for (std::size_t t = 0; t < seeds; ++t) {
      SamplerConfig config;
      config.seed = mix_seed(seed, 600 + t);
      EvalCounter counter;
      const LandmarkSample sample = recursive_rls_fixed_size(kernel, data, s, config, counter);
      build_factors(kernel, data, sample, counter);
      ratio += static_cast<double>(counter.count()) /
               (static_cast<double>(n) * static_cast<double>(sample.size()) * static_cast<double>(seeds));
    }
    ratios.push_back(ratio);
    detail += (detail.empty() ? "" : ", ") + std::string("n=") + std::to_string(n) + ": " + fmt(ratio);
  }
  bool pass = true;
  double worst = 0.0;
  for (std::size_t i = 1; i < ratios.size(); ++i) {
    worst = std::max(worst, ratios[i] / ratios[i - 1]);
    pass = pass && ratios[i] / ratios[i - 1] < kDoublingGrowth;
  }
  return {6, "", pass, "evals/(n s'): " + detail + "; worst growth per doubling " + fmt(worst)};
}

// ---- 7: clustered data, RLS vs uniform vs random features -------------------

CriterionResult c07(Tier tier, std::uint64_t seed) {
  const Index n = full(tier) ? 4000 : 2000;
  const std::size_t seeds = full(tier) ? 10 : 5;
  const std::vector<std::size_t> sizes =
      full(tier) ? std::vector<std::size_t>{50, 100, 200} : std::vector<std::size_t>{50, 100};
  const Index d = 2;
  // Ten tight small clusters with geometrically decreasing sizes next to a
  // dominant cluster holding 90% of the points.
  const Dataset data = clustered_gaussian(dominant_cluster_spec(n, d, 10, 0.9, 10.0, 0.05, 0.05, 0.8), mix_seed(seed, 7));
  const KernelSpec kernel = gaussian(1.0);
  const DenseKernel k = DenseKernel::from_data(kernel, data);

  bool pass = true;
  std::string detail;
  for (const std::size_t s : sizes) {
    std::vector<double> rls, uni, rff;
    for (std::size_t t = 0; t < seeds; ++t) {
      const std::uint64_t trial_seed = mix_seed(seed, 700 + 1000 * s + t);
      EvalCounter counter;
      SamplerConfig config;
      config.seed = trial_seed;
      const auto rls_factors =
          build_factors(kernel, data, recursive_rls_fixed_size(kernel, data, s, config, counter), counter);
      rls.push_back(lanczos_spectral_error(k, rls_factors.factor_rows(), kLanczosSteps, trial_seed));
      const auto uni_factors =
          build_factors(kernel, data, uniform_sample(n, static_cast<Index>(s), mix_seed(trial_seed, 1)), counter);
      uni.push_back(lanczos_spectral_error(k, uni_factors.factor_rows(), kLanczosSteps, trial_seed));
      const RFFMap map = rff_build(d, static_cast<Index>(s), 1.0, mix_seed(trial_seed, 2));
      rff.push_back(lanczos_spectral_error(k, rff_transform(map, data), kLanczosSteps, trial_seed));
    }
    const double mr = median(rls), mu = median(uni), mf = median(rff);
    bool ok = mr < mu && mu < mf;
    if (s == sizes.front()) ok = ok && mu >= kUniformGap * mr;
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + std::string("s=") + std::to_string(s) + " rls " + fmt(mr) +
              " uniform " + fmt(mu) + " rff " + fmt(mf);
  }
  return {7, "", pass, "median spectral error " + detail};
}

// ---- 8: projection-cost preservation --------------------------------------

CriterionResult c08(Tier tier, std::uint64_t seed) {
  const Index n = 300;
  const Index rank = 5;
  const std::size_t seeds = full(tier) ? 20 : 5;
  const std::size_t need = full(tier) ? 18 : 4;
  const std::size_t projections = full(tier) ? 50 : 20;
  const Dataset data = normal_data(n, 4, mix_seed(seed, 8));
  const KernelSpec kernel = gaussian(2.0);
  const DenseKernel k = DenseKernel::from_data(kernel, data);
  const Vector sigma = k.eigenvalues().cwiseMax(0.0);
  const double lambda = kPcpEpsilon / static_cast<double>(rank) * sigma.tail(n - rank).sum();

  std::size_t ok = 0;
  double lowest = 1.0;
  double mean_size = 0.0;
  for (std::size_t t = 0; t < seeds; ++t) {
    SamplerConfig config;
    config.seed = mix_seed(seed, 800 + t);
    config.base_case_threshold = 32;  // force a few recursion levels at n = 300
    EvalCounter counter;
    const LandmarkSample sample = recursive_rls_fixed_lambda(kernel, data, lambda, config, counter);
    const NystromFactors factors = build_factors(kernel, data, sample, counter);
    const double fraction = pcp_check(k, factors, rank, kPcpEpsilon, projections, mix_seed(config.seed, 1));
    lowest = std::min(lowest, fraction);
    mean_size += static_cast<double>(sample.size()) / static_cast<double>(seeds);
    if (fraction >= kPcpFraction) ++ok;
  }
  return {8, "", ok >= need,
          "fraction >= " + fmt(kPcpFraction) + " in " + std::to_string(ok) + "/" + std::to_string(seeds) +
              " seeds (need " + std::to_string(need) + "), lowest " + fmt(lowest) + ", mean s' " + fmt(mean_size)};
}

// ---- 9: KRR against the dense solve; eigenvalue domination ------------------

CriterionResult c09(Tier tier, std::uint64_t seed) {
  const std::vector<Index> ns = full(tier) ? std::vector<Index>{50, 150, 300} : std::vector<Index>{50, 150};
  double worst_krr = 0.0;
  double worst_eig = -std::numeric_limits<double>::infinity();
  bool pass = true;
  std::size_t cases = 0;
  for (const Index n : ns) {
    const Dataset data = normal_data(n, 3, mix_seed(seed, 900 + n));
    const KernelSpec kernel = gaussian(1.5);
    const DenseKernel k = DenseKernel::from_data(kernel, data);
    std::mt19937_64 rng(mix_seed(seed, 950 + n));
    std::normal_distribution<double> normal;
    Vector y(n);
    for (Index i = 0; i < n; ++i) y(i) = std::sin(data.features(i, 0)) + 0.1 * normal(rng);

    EvalCounter counter;
    const NystromFactors full_factors = build_factors(kernel, data, LandmarkSample::identity(n), counter);
    for (const double lambda : {1e-2, 1.0}) {
      Matrix reg = k.matrix();
      reg.diagonal().array() += lambda;
      const Vector dense = reg.llt().solve(y);
      const KRRModel model = krr_fit(kernel, full_factors, y, lambda);
      const double err = (model.alpha - dense).norm() / dense.norm();
      worst_krr = std::max(worst_krr, err);
      pass = pass && err <= kKrrTol;
    }

    // Eigenvalue domination for sampled approximations.
    SamplerConfig config;
    config.seed = mix_seed(seed, 970 + n);
    const std::size_t s = static_cast<std::size_t>(n / 5);
    std::vector<LandmarkSample> samples{recursive_rls_fixed_size(kernel, data, s, config, counter),
                                        uniform_sample(n, static_cast<Index>(s), config.seed)};
    for (const auto& sample : samples) {
      const Matrix g = build_factors(kernel, data, sample, counter).factor_rows();
      const Eigen::SelfAdjointEigenSolver<Matrix> small(g.transpose() * g, Eigen::EigenvaluesOnly);
      Vector approx = Vector::Zero(n);
      approx.head(small.eigenvalues().size()) = small.eigenvalues().reverse();
      const double margin = (approx - k.eigenvalues()).maxCoeff();
      worst_eig = std::max(worst_eig, margin);
      pass = pass && margin <= kEigenSlack;
      ++cases;
    }
  }
  return {9, "", pass,
          "worst KRR relative error " + fmt(worst_krr) + " (tol " + fmt(kKrrTol) + "), max sigma_i(K~) - sigma_i(K) " +
              fmt(worst_eig) + " over " + std::to_string(cases) + " approximations"};
}

// ---- 10: accelerated recursion --------------------------------------------

CriterionResult c10(Tier tier, std::uint64_t seed) {
  const Index n = full(tier) ? 16000 : 4000;
  const std::size_t s = full(tier) ? 400 : 100;
  const std::size_t seeds = full(tier) ? 10 : 4;
  const Index d = 3;
  const Dataset data = normal_data(n, d, mix_seed(seed, 10));
  const KernelSpec kernel = gaussian(1.0);
  // Errors are measured on one fixed subset shared by every run.
  const auto subset = uniform_subset(n, full(tier) ? 3000 : 1500, mix_seed(seed, 11));
  const DenseKernel k = DenseKernel::from_data(kernel, take_rows(data, subset));

  std::vector<double> evals[2], errors[2];
  for (std::size_t t = 0; t < seeds; ++t) {
    for (int accelerated = 0; accelerated < 2; ++accelerated) {
      SamplerConfig config;
      config.seed = mix_seed(seed, 1000 + t);
      config.accelerated = accelerated == 1;
      EvalCounter counter;
      const LandmarkSample sample = recursive_rls_fixed_size(kernel, data, s, config, counter);
      evals[accelerated].push_back(static_cast<double>(counter.count()));
      const NystromFactors factors = build_factors(kernel, data, sample, counter);
      errors[accelerated].push_back(
          lanczos_spectral_error(k, take_rows(factors.factor_rows(), subset), kLanczosSteps, config.seed));
    }
  }
  const double saving = median(evals[0]) / median(evals[1]);
  const double degrade = median(errors[1]) / median(errors[0]);
  return {10, "", saving >= kAcceleratedSaving && degrade <= kAcceleratedDegrade,
          "recursion evals standard/accelerated " + fmt(saving) + " (need >= " + fmt(kAcceleratedSaving) +
              "), median error accelerated/standard " + fmt(degrade) + " (need <= " + fmt(kAcceleratedDegrade) +
              "), cap " + std::to_string(accelerated_cap(static_cast<std::size_t>(n), s))};
}

// ---- 11: bit-identical reruns -------------------------------------------------

template <class A, class B>
bool same_bits(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  const auto ea = a.eval();
  const auto eb = b.eval();
  return std::memcmp(ea.data(), eb.data(), sizeof(double) * static_cast<std::size_t>(ea.size())) == 0;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

bool same_sample(const LandmarkSample& a, const LandmarkSample& b) {
  return a.indices == b.indices && same_bits(a.probabilities, b.probabilities) && same_bits(a.weights, b.weights);
}

CriterionResult c11(Tier tier, std::uint64_t seed) {
  const Index n = full(tier) ? 3000 : 1200;
  const Dataset data = clustered_gaussian(dominant_cluster_spec(n, 3, 10, 0.9, 10.0, 1.0, 0.3), mix_seed(seed, 12));
  const KernelSpec kernel = gaussian(1.0);
  std::vector<std::string> failed;
  std::size_t checks = 0;
  auto check = [&](const std::string& what, bool same) {
    ++checks;
    if (!same) failed.push_back(what);
  };

  SamplerConfig config;
  config.seed = mix_seed(seed, 1100);
  auto twice = [&](auto&& make) { return std::make_pair(make(), make()); };

  {
    const auto [a, b] = twice([&] {
      EvalCounter c;
      return recursive_rls_fixed_lambda(kernel, data, 1.0, config, c);
    });
    check("recursive_rls_fixed_lambda", same_sample(a, b));
  }
  for (const bool accelerated : {false, true}) {
    SamplerConfig cfg = config;
    cfg.accelerated = accelerated;
    const auto [a, b] = twice([&] {
      EvalCounter c;
      return recursive_rls_fixed_size(kernel, data, 80, cfg, c);
    });
    check(accelerated ? "recursive_rls_fixed_size(accelerated)" : "recursive_rls_fixed_size", same_sample(a, b));
  }
  {
    SamplerConfig cfg = config;
    cfg.mode = SamplerMode::TheoryFixedLambda;
    const auto [a, b] = twice([&] {
      EvalCounter c;
      return recursive_rls_fixed_lambda(kernel, data, 5.0, cfg, c);
    });
    check("recursive_rls_fixed_lambda(theory)", same_sample(a, b));
  }
  {
    Vector p = Vector::LinSpaced(500, 0.0, 1.0);
    check("bernoulli_select", same_sample(bernoulli_select(p, seed), bernoulli_select(p, seed)));
  }
  check("uniform_sample", same_sample(uniform_sample(n, 60, seed), uniform_sample(n, 60, seed)));
  check("uniform_subset", uniform_subset(n, 300, seed) == uniform_subset(n, 300, seed));
  {
    const RFFMap a = rff_build(data.d(), 64, 1.0, seed);
    const RFFMap b = rff_build(data.d(), 64, 1.0, seed);
    check("rff_build", same_bits(a.frequencies, b.frequencies) && same_bits(a.phases, b.phases));
    check("rff_transform", same_bits(rff_transform(a, data), rff_transform(b, data)));
  }
  EvalCounter c;
  const NystromFactors factors = build_factors(kernel, data, uniform_sample(n, 60, seed), c);
  {
    SpectralEstimateOptions opt;
    opt.subset_size = 800;
    opt.seed = seed;
    const auto a = estimate_spectral_error(kernel, data, factors, opt);
    const auto b = estimate_spectral_error(kernel, data, factors, opt);
    check("estimate_spectral_error", std::memcmp(&a.value, &b.value, sizeof(double)) == 0 && a.iterations == b.iterations);
  }
  {
    const Matrix f = feature_map(factors);
    const auto a = kmeans_on_features(f, 5, 3, 100, seed);
    const auto b = kmeans_on_features(f, 5, 3, 100, seed);
    check("kmeans_on_features", a.assignment == b.assignment && same_bits(a.history, b.history));
  }
  {
    const auto spec = dominant_cluster_spec(500, 2, 4, 0.8, 10.0, 1.0, 0.2);
    check("clustered_gaussian", same_bits(clustered_gaussian(spec, seed).features, clustered_gaussian(spec, seed).features));
    const Vector ev = Vector::LinSpaced(100, 2.0, 0.0);
    const DenseKernel a = spectrum_kernel(ev, seed);
    const DenseKernel b = spectrum_kernel(ev, seed);
    check("spectrum_kernel", same_bits(a.matrix(), b.matrix()));
    const Dataset small = take_rows(data, uniform_subset(n, 200, seed));
    const DenseKernel kk = DenseKernel::from_data(kernel, small);
    EvalCounter c2;
    const NystromFactors f2 = build_factors(kernel, small, uniform_sample(200, 20, seed), c2);
    check("pcp_check", pcp_check(kk, f2, 3, 0.5, 10, seed) == pcp_check(kk, f2, 3, 0.5, 10, seed));
    check("lanczos_spectral_error", lanczos_spectral_error(kk, f2.factor_rows(), 50, seed) ==
                                        lanczos_spectral_error(kk, f2.factor_rows(), 50, seed));
  }

  std::string detail = std::to_string(checks - failed.size()) + "/" + std::to_string(checks) + " operations bit-identical";
  if (!failed.empty()) {
    detail += "; differing:";
    for (const auto& f : failed) detail += " " + f;
  }
  return {11, "", failed.empty(), detail};
}

using Runner = CriterionResult (*)(Tier, std::uint64_t);

struct Entry {
  const char* name;
  Runner run;
  double full_budget_seconds;  // 0: no runtime limit
};

constexpr Entry kCriteria[] = {
    {"score-identity", c01, 30.0},      {"deff-sum", c02, 0.0},          {"tail-lambda-bound", c03, 0.0},
    {"spectral-guarantee", c04, 300.0}, {"size-control", c05, 0.0},      {"eval-scaling", c06, 600.0},
    {"clustered-superiority", c07, 0.0}, {"projection-cost", c08, 0.0},  {"krr-consistency", c09, 0.0},
    {"accelerated-mode", c10, 0.0},     {"determinism", c11, 0.0},
};

}  // namespace

std::string to_string(Tier tier) { return tier == Tier::Full ? "full" : "quick"; }

Tier parse_tier(const std::string& text) {
  if (text == "quick") return Tier::Quick;
  if (text == "full") return Tier::Full;
  throw ArgumentError("unknown tier '" + text + "' (expected quick or full)");
}

std::string CriterionResult::line() const {
  std::ostringstream out;
  out << (passed ? "PASS" : "FAIL") << " C" << std::setw(2) << std::setfill('0') << id << ' ' << name << " ("
      << std::fixed << std::setprecision(1) << seconds << " s): " << detail;
  return out.str();
}

int criterion_count() { return static_cast<int>(std::size(kCriteria)); }

std::string criterion_name(int id) {
  if (id < 1 || id > criterion_count()) throw ArgumentError("no criterion " + std::to_string(id));
  return kCriteria[id - 1].name;
}

CriterionResult run_criterion(int id, Tier tier, std::uint64_t seed) {
  const std::string name = criterion_name(id);
  const auto start = std::chrono::steady_clock::now();
  CriterionResult result;
  try {
    result = kCriteria[id - 1].run(tier, seed);
  } catch (const std::exception& e) {
    result.passed = false;
    result.detail = std::string("raised: ") + e.what();
  }
  result.id = id;
  result.name = name;
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double budget = kCriteria[id - 1].full_budget_seconds;
  if (full(tier) && budget > 0.0 && result.seconds >= budget) {
    result.passed = false;
    result.detail += "; runtime over the " + fmt(budget) + " s budget";
  }
  return result;
}

std::vector<CriterionResult> run_verification(const VerifyOptions& options,
                                              const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<int> ids = options.only;
  if (ids.empty()) {
    for (int i = 1; i <= criterion_count(); ++i) ids.push_back(i);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<CriterionResult> results;
  for (const int id : ids) {
    results.push_back(run_criterion(id, options.tier, options.seed));
    if (on_result) on_result(results.back());
  }
  return results;
}

}  // namespace rrls
