#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "rrls/baselines.hpp"
#include "rrls/container.hpp"
#include "rrls/data_io.hpp"
#include "rrls/downstream.hpp"
#include "rrls/kernels.hpp"
#include "rrls/nystrom.hpp"
#include "rrls/sampler.hpp"
#include "rrls/synthetic.hpp"
#include "rrls/verify.hpp"

namespace rrls::cli {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

/// Bad or conflicting flags discovered after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Flags shared by the sampling subcommands.
struct Common {
  std::string data;
  std::string kernel;
  std::optional<double> lambda;
  std::optional<std::size_t> size;
  double delta = 0.01;
  std::string mode = "practical";
  bool accelerated = false;
  std::size_t trials = 1;
  std::size_t subset = 20000;
  std::uint64_t seed = 0;
  std::string out;
  std::optional<int> label_column;
  std::string config;
};

void add_data(CLI::App* cmd, Common& c, bool required = true) {
  auto* opt = cmd->add_option("--data", c.data, "Dataset (.csv, otherwise LIBSVM)");
  if (required) opt->required();
  cmd->add_option("--label-column", c.label_column, "CSV label column (negative counts from the end)");
}

void add_kernel(CLI::App* cmd, Common& c) {
  cmd->add_option("--kernel", c.kernel, "Kernel, e.g. gaussian:sigma=1, linear, poly:degree=3,offset=1")->required();
}

void add_sampler(CLI::App* cmd, Common& c) {
  cmd->add_option("--delta", c.delta, "Failure probability")->capture_default_str();
  cmd->add_option("--mode", c.mode, "theory or practical")->capture_default_str();
  cmd->add_flag("--accelerated", c.accelerated, "Cap recursive sample sizes (fixed-size only)");
  cmd->add_option("--config", c.config, "Sampler config file (key=value lines); flags override");
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
}

std::optional<Index> resolve_label_column(const std::string& path, std::optional<int> column) {
  if (!column) return std::nullopt;
  if (*column >= 0) return *column;
  std::ifstream in(path);
  std::string first;
  if (!in || !std::getline(in, first)) throw Error("cannot read " + path);
  const auto total = static_cast<int>(std::count(first.begin(), first.end(), ',')) + 1;
  if (-*column > total) throw UsageError("label column " + std::to_string(*column) + " out of range");
  return total + *column;
}

Dataset load_data(const Common& c) {
  Dataset data = load_auto(c.data, resolve_label_column(c.data, c.label_column));
  data.validate();
  return data;
}

SamplerConfig sampler_config(const Common& c, CLI::App* cmd) {
  SamplerConfig config;
  if (!c.config.empty()) {
    std::ifstream in(c.config);
    if (!in) throw Error("cannot open " + c.config);
    std::ostringstream text;
    text << in.rdbuf();
    config = SamplerConfig::parse(text.str());
  }
  if (c.config.empty() || cmd->count("--delta")) config.delta = c.delta;
  if (c.config.empty() || cmd->count("--mode")) {
    const SamplerMode mode = parse_sampler_mode(c.mode);
    config.mode = mode;
  }
  if (c.accelerated) config.accelerated = true;
  if (c.config.empty() || cmd->count("--seed")) config.seed = c.seed;
  config.validate();
  return config;
}

// Theory mode follows the recursion that is run.
SamplerConfig for_recursion(SamplerConfig config, bool fixed_size) {
  if (config.theory()) config.mode = fixed_size ? SamplerMode::TheoryFixedSize : SamplerMode::TheoryFixedLambda;
  return config;
}

struct SampleRun {
  LandmarkSample sample;
  SamplerTrace trace;
};

SampleRun run_sampler(const KernelSpec& kernel, const Dataset& data, const Common& c, const SamplerConfig& config,
                      EvalCounter& counter) {
  if (c.lambda.has_value() == c.size.has_value()) throw UsageError("exactly one of --lambda and --size is required");
  SampleRun run;
  if (c.lambda) {
    if (config.accelerated) throw UsageError("--accelerated applies to --size sampling only");
    run.sample = recursive_rls_fixed_lambda(kernel, data, *c.lambda, for_recursion(config, false), counter, &run.trace);
  } else {
    run.sample = recursive_rls_fixed_size(kernel, data, *c.size, for_recursion(config, true), counter, &run.trace);
  }
  return run;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << text;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// ---- sample -----------------------------------------------------------------

int cmd_sample(const Common& c, CLI::App* cmd, std::ostream& out) {
  const KernelSpec kernel = KernelSpec::parse(c.kernel);
  const Dataset data = load_data(c);
  const SamplerConfig config = sampler_config(c, cmd);
  EvalCounter counter;
  const auto start = Clock::now();
  const SampleRun run = run_sampler(kernel, data, c, config, counter);
  const double elapsed = seconds_since(start);
  if (!c.out.empty()) write_text(c.out, run.sample.to_csv());

  json line;
  line["command"] = "sample";
  line["n"] = data.n();
  line["s"] = run.sample.size();
  line["probability_sum"] = run.trace.levels.empty() ? 0.0 : run.trace.levels.front().probability_sum;
  line["kernel_evals"] = counter.count();
  if (c.lambda) line["lambda"] = *c.lambda;
  if (c.size) line["requested_size"] = *c.size;
  line["mode"] = to_string(config.mode);
  line["accelerated"] = config.accelerated;
  line["depth"] = run.trace.depth();
  line["seed"] = config.seed;
  line["wall_time_seconds"] = elapsed;
  if (!c.out.empty()) line["out"] = c.out;
  out << line.dump() << '\n';
  return kOk;
}

// ---- approx -----------------------------------------------------------------

int cmd_approx(const Common& c, const std::string& sample_path, const std::string& method, CLI::App* cmd,
               std::ostream& out) {
  const KernelSpec kernel = KernelSpec::parse(c.kernel);
  const Dataset data = load_data(c);
  EvalCounter counter;
  const auto start = Clock::now();
  LandmarkSample sample;
  if (!sample_path.empty()) {
    if (c.lambda || c.size) throw UsageError("--sample excludes --lambda and --size");
    std::ifstream in(sample_path);
    if (!in) throw Error("cannot open " + sample_path);
    std::ostringstream text;
    text << in.rdbuf();
    sample = LandmarkSample::from_csv(text.str());
  } else if (method == "uniform") {
    if (!c.size) throw UsageError("uniform landmarks need --size");
    sample = uniform_sample(data.n(), static_cast<Index>(*c.size), c.seed);
  } else if (method == "rls") {
    sample = run_sampler(kernel, data, c, sampler_config(c, cmd), counter).sample;
  } else {
    throw UsageError("unknown --method '" + method + "' (expected rls or uniform)");
  }
  const NystromFactors factors = build_factors(kernel, data, sample, counter);
  const double elapsed = seconds_since(start);

  json line;
  line["command"] = "approx";
  line["n"] = data.n();
  line["s"] = factors.s();
  line["rank"] = factors.rank;
  line["kernel_evals"] = counter.count();
  line["wall_time_seconds"] = elapsed;
  if (c.subset > 0) {
    SpectralEstimateOptions options;
    options.subset_size = c.subset;
    options.seed = c.seed;
    line["spectral_error"] = estimate_spectral_error(kernel, data, factors, options).value;
  }
  if (!c.out.empty()) {
    ModelContainer model;
    model.kernel = kernel;
    model.factors = factors;
    save_container(model, c.out);
    line["out"] = c.out;
  }
  out << line.dump() << '\n';
  return kOk;
}

// ---- bench ------------------------------------------------------------------

std::uint64_t run_seed(std::uint64_t seed, const std::string& method, std::size_t s, std::size_t trial) {
  std::uint64_t h = mix_seed(seed, s);
  for (const char ch : method) h = mix_seed(h, static_cast<unsigned char>(ch));
  return mix_seed(h, trial);
}

int cmd_bench(const Common& c, const std::string& methods_text, const std::string& sizes_text, CLI::App* cmd,
              std::ostream& out, std::ostream& err) {
  const KernelSpec kernel = KernelSpec::parse(c.kernel);
  const Dataset data = load_data(c);
  const SamplerConfig base = sampler_config(c, cmd);
  const std::vector<std::string> methods = split(methods_text, ',');
  std::vector<std::size_t> sizes;
  for (const auto& s : split(sizes_text, ',')) {
    try {
      sizes.push_back(static_cast<std::size_t>(std::stoull(s)));
    } catch (const std::exception&) {
      throw UsageError("bad size '" + s + "' in --sizes");
    }
  }
  if (c.size) sizes.push_back(*c.size);
  if (sizes.empty()) throw UsageError("bench needs --sizes (or --size)");
  if (methods.empty()) throw UsageError("bench needs at least one method");
  for (const auto& m : methods) {
    if (m != "rls" && m != "rls_accelerated" && m != "uniform" && m != "rff") {
      throw UsageError("unknown method '" + m + "' (rls, rls_accelerated, uniform, rff)");
    }
    if (m == "rff" && !kernel.is_gaussian()) throw UsageError("rff requires a gaussian kernel");
  }
  for (const std::size_t s : sizes) {
    if (s < 1) throw UsageError("sizes must be >= 1");
  }
  if (c.trials < 1) throw UsageError("--trials must be >= 1");
  if (c.subset < 1) throw UsageError("--subset must be >= 1");
  if (static_cast<Index>(c.subset) > data.n()) {
    err << "warning: --subset " << c.subset << " exceeds n = " << data.n() << "; using all points\n";
  }

  SpectralEstimateOptions options;
  options.subset_size = c.subset;
  options.seed = c.seed;  // same subset for every run

  std::ofstream csv;
  if (!c.out.empty()) {
    csv.open(c.out);
    if (!csv) throw Error("cannot open " + c.out + " for writing");
    csv << "method,s,trial,seed,spectral_error,wall_time_seconds,kernel_evals\n";
    csv.precision(17);
  }

  for (const auto& method : methods) {
    for (const std::size_t s : sizes) {
      for (std::size_t trial = 0; trial < c.trials; ++trial) {
        const std::uint64_t seed = run_seed(c.seed, method, s, trial);
        EvalCounter counter;
        const auto start = Clock::now();
        double error = 0.0;
        double elapsed = 0.0;
        if (method == "rff") {
          const RFFMap map = rff_build(data.d(), static_cast<Index>(s), kernel.sigma(), seed);
          const Matrix z = rff_transform(map, data);
          elapsed = seconds_since(start);
          error = estimate_spectral_error(kernel, data, z, options).value;
        } else {
          LandmarkSample sample;
          if (method == "uniform") {
            sample = uniform_sample(data.n(), static_cast<Index>(std::min<std::size_t>(s, data.n())), seed);
          } else {
            SamplerConfig config = for_recursion(base, true);
            config.seed = seed;
            config.accelerated = method == "rls_accelerated";
            sample = recursive_rls_fixed_size(kernel, data, s, config, counter);
          }
          const NystromFactors factors = build_factors(kernel, data, sample, counter);
          elapsed = seconds_since(start);
          error = estimate_spectral_error(kernel, data, factors, options).value;
        }
        json line;
        line["method"] = method;
        line["s"] = s;
        line["trial"] = trial;
        line["spectral_error"] = error;
        line["wall_time_seconds"] = elapsed;
        line["kernel_evals"] = counter.count();
        line["seed"] = seed;
        out << line.dump() << '\n';
        if (csv.is_open()) {
          csv << method << ',' << s << ',' << trial << ',' << seed << ',' << error << ',' << elapsed << ','
              << counter.count() << '\n';
        }
      }
    }
  }
  return kOk;
}

int cmd_list_datasets(std::ostream& out) {
  for (const auto& entry : benchmark_registry()) {
    json line;
    line["name"] = entry.name;
    line["n"] = entry.n;
    line["d"] = entry.d;
    out << line.dump() << '\n';
  }
  return kOk;
}

// ---- regress ----------------------------------------------------------------

double rmse(const Vector& a, const Vector& b) { return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size())); }

double sign_error(const Vector& pred, const Vector& y) {
  Index wrong = 0;
  for (Index i = 0; i < y.size(); ++i) {
    if ((pred(i) >= 0.0) != (y(i) >= 0.0)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(y.size());
}

int cmd_regress(const Common& c, const std::string& test_path, const std::string& method, const std::string& task,
                CLI::App* cmd, std::ostream& out) {
  if (task != "regression" && task != "classification") {
    throw UsageError("--task must be regression or classification");
  }
  if (!c.lambda) throw UsageError("regress needs --lambda (ridge parameter)");
  const KernelSpec kernel = KernelSpec::parse(c.kernel);
  const Dataset train = load_data(c);
  if (!train.labels) throw UsageError("training data has no labels (use --label-column for CSV)");
  std::optional<Dataset> test;
  if (!test_path.empty()) {
    Common tc = c;
    tc.data = test_path;
    test = load_data(tc);
    if (!test->labels) throw UsageError("test data has no labels");
    if (test->d() != train.d()) throw UsageError("test data dimension differs from training data");
  }

  EvalCounter counter;
  auto start = Clock::now();
  LandmarkSample sample;
  if (method == "full") {
    sample = LandmarkSample::identity(train.n());
  } else {
    if (!c.size) throw UsageError("--size is required unless --method full");
    if (method == "uniform") {
      sample = uniform_sample(train.n(), static_cast<Index>(std::min<std::size_t>(*c.size, train.n())), c.seed);
    } else if (method == "rls" || method == "rls_accelerated") {
      SamplerConfig config = for_recursion(sampler_config(c, cmd), true);
      config.accelerated = config.accelerated || method == "rls_accelerated";
      sample = recursive_rls_fixed_size(kernel, train, *c.size, config, counter);
    } else {
      throw UsageError("unknown --method '" + method + "' (rls, rls_accelerated, uniform, full)");
    }
  }
  const double sample_seconds = seconds_since(start);

  start = Clock::now();
  const NystromFactors factors = build_factors(kernel, train, sample, counter);
  const KRRModel model = krr_fit(kernel, factors, *train.labels, *c.lambda);
  const double fit_seconds = seconds_since(start);

  const Vector fitted = krr_fitted(model, factors);
  json line;
  line["command"] = "regress";
  line["method"] = method;
  line["task"] = task;
  line["n"] = train.n();
  line["s"] = factors.s();
  line["lambda"] = *c.lambda;
  const bool classify = task == "classification";
  line[classify ? "train_error" : "train_rmse"] = classify ? sign_error(fitted, *train.labels) : rmse(fitted, *train.labels);
  double predict_seconds = 0.0;
  if (test) {
    start = Clock::now();
    const Vector pred = krr_predict_batch(model, train, test->features, counter);
    predict_seconds = seconds_since(start);
    line[classify ? "test_error" : "test_rmse"] = classify ? sign_error(pred, *test->labels) : rmse(pred, *test->labels);
    line["n_test"] = test->n();
  }
  line["sample_seconds"] = sample_seconds;
  line["fit_seconds"] = fit_seconds;
  line["predict_seconds"] = predict_seconds;
  line["kernel_evals"] = counter.count();
  line["seed"] = c.seed;
  if (!c.out.empty()) {
    ModelContainer container;
    container.kernel = kernel;
    container.factors = factors;
    container.krr = model;
    save_container(container, c.out);
    line["out"] = c.out;
  }
  out << line.dump() << '\n';
  return kOk;
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
  Index n = 1000;
  Index d = 2;
  Index clusters = 10;
  double dominant = 0.9;
  double separation = 10.0;
  double spread = 1.0;
  double small_spread = 0.3;
  double size_ratio = 1.0;
};

int cmd_synth(const Common& c, const SynthArgs& a, std::ostream& out) {
  if (c.out.empty()) throw UsageError("synth needs --out");
  const ClusterSpec spec =
      dominant_cluster_spec(a.n, a.d, a.clusters, a.dominant, a.separation, a.spread, a.small_spread, a.size_ratio);
  Dataset data = clustered_gaussian(spec, c.seed);
  for (Index j = 0; j < data.d(); ++j) data.feature_names.push_back("x" + std::to_string(j));
  save_csv(data, c.out);
  json line;
  line["command"] = "synth";
  line["n"] = data.n();
  line["d"] = data.d();
  line["clusters"] = spec.sizes.size();
  line["sizes"] = spec.sizes;
  line["seed"] = c.seed;
  line["out"] = c.out;
  out << line.dump() << '\n';
  return kOk;
}

// ---- verify -----------------------------------------------------------------

int cmd_verify(const std::string& tier, std::uint64_t seed, const std::string& only, std::ostream& out) {
  VerifyOptions options;
  try {
    options.tier = parse_tier(tier);
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  options.seed = seed;
  for (const auto& id : split(only, ',')) {
    int value = 0;
    try {
      value = std::stoi(id);
    } catch (const std::exception&) {
      throw UsageError("bad criterion id '" + id + "'");
    }
    if (value < 1 || value > criterion_count()) throw UsageError("no criterion " + id);
    options.only.push_back(value);
  }
  const auto start = Clock::now();
  std::size_t failed = 0;
  const auto results = run_verification(options, [&](const CriterionResult& r) {
    if (!r.passed) ++failed;
    out << r.line() << '\n' << std::flush;
  });
  out << (failed ? "FAIL" : "PASS") << ' ' << results.size() - failed << '/' << results.size() << " criteria, tier "
      << to_string(options.tier) << ", seed " << seed << ", " << seconds_since(start) << " s\n";
  return failed ? kVerifyFailed : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nystrom kernel approximation by recursive ridge leverage score sampling", "rrls"};
  app.require_subcommand(1);

  Common c;
  std::string sample_path;
  std::string method = "rls";
  std::string methods = "rls,rls_accelerated,uniform,rff";
  std::string sizes;
  std::string test_path;
  std::string task = "regression";
  std::string tier = "quick";
  std::string only;
  bool list = false;
  SynthArgs synth;

  auto* sample = app.add_subcommand("sample", "Sample landmarks and write index,probability,weight CSV");
  add_data(sample, c);
  add_kernel(sample, c);
  sample->add_option("--lambda", c.lambda, "Ridge parameter (fixed-lambda recursion)");
  sample->add_option("--size", c.size, "Target sample size (fixed-size recursion)");
  add_sampler(sample, c);
  sample->add_option("--out", c.out, "Sample CSV path");

  auto* approx = app.add_subcommand("approx", "Build Nystrom factors and save a model container");
  add_data(approx, c);
  add_kernel(approx, c);
  approx->add_option("--sample", sample_path, "Landmark CSV from `sample`");
  approx->add_option("--method", method, "rls or uniform")->capture_default_str();
  approx->add_option("--lambda", c.lambda, "Ridge parameter for rls sampling");
  approx->add_option("--size", c.size, "Sample size");
  add_sampler(approx, c);
  approx->add_option("--subset", c.subset, "Spectral-error subset size (0: skip)")->capture_default_str();
  approx->add_option("--out", c.out, "Model container path");

  auto* bench = app.add_subcommand("bench", "Spectral error vs sample size for several methods");
  bench->add_flag("--list-datasets", list, "Print the benchmark dataset registry and exit");
  add_data(bench, c, false);
  bench->add_option("--kernel", c.kernel, "Kernel config");
  bench->add_option("--methods", methods, "Comma list of rls, rls_accelerated, uniform, rff")->capture_default_str();
  bench->add_option("--sizes", sizes, "Comma list of sample sizes (D for rff)");
  bench->add_option("--size", c.size, "Single sample size (added to --sizes)");
  bench->add_option("--trials", c.trials, "Trials per (method, size)")->capture_default_str();
  bench->add_option("--subset", c.subset, "Spectral-error subset size")->capture_default_str();
  add_sampler(bench, c);
  bench->add_option("--out", c.out, "CSV plot data path");

  auto* regress = app.add_subcommand("regress", "Kernel ridge regression on a Nystrom approximation");
  add_data(regress, c);
  add_kernel(regress, c);
  regress->add_option("--test", test_path, "Held-out dataset");
  regress->add_option("--method", method, "rls, rls_accelerated, uniform or full")->capture_default_str();
  regress->add_option("--task", task, "regression or classification")->capture_default_str();
  regress->add_option("--lambda", c.lambda, "Ridge parameter")->required();
  regress->add_option("--size", c.size, "Sample size");
  add_sampler(regress, c);
  regress->add_option("--out", c.out, "Model container path");

  auto* synth_cmd = app.add_subcommand("synth", "Write a clustered synthetic dataset to CSV");
  synth_cmd->add_option("--n", synth.n, "Number of points")->capture_default_str();
  synth_cmd->add_option("--d", synth.d, "Dimension")->capture_default_str();
  synth_cmd->add_option("--clusters", synth.clusters, "Number of small clusters")->capture_default_str();
  synth_cmd->add_option("--dominant", synth.dominant, "Fraction of points in the dominant cluster")->capture_default_str();
  synth_cmd->add_option("--separation", synth.separation, "Distance between neighbouring centers")->capture_default_str();
  synth_cmd->add_option("--spread", synth.spread, "Dominant cluster standard deviation")->capture_default_str();
  synth_cmd->add_option("--small-spread", synth.small_spread, "Small cluster standard deviation")->capture_default_str();
  synth_cmd->add_option("--size-ratio", synth.size_ratio, "Size ratio between consecutive small clusters")
      ->capture_default_str();
  synth_cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--out", c.out, "CSV path")->required();

  auto* verify = app.add_subcommand("verify", "Run the acceptance property suite");
  verify->add_option("--tier", tier, "quick or full")->capture_default_str();
  verify->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  verify->add_option("--only", only, "Comma list of criterion ids");

  std::vector<const char*> argv{"rrls"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (sample->parsed()) return cmd_sample(c, sample, out);
    if (approx->parsed()) return cmd_approx(c, sample_path, method, approx, out);
    if (bench->parsed()) {
      if (list) return cmd_list_datasets(out);
      if (c.data.empty() || c.kernel.empty()) throw UsageError("bench needs --data and --kernel");
      return cmd_bench(c, methods, sizes, bench, out, err);
    }
    if (regress->parsed()) return cmd_regress(c, test_path, method, task, regress, out);
    if (synth_cmd->parsed()) return cmd_synth(c, synth, out);
    if (verify->parsed()) return cmd_verify(tier, c.seed, only, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ArgumentError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const DegenerateError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const EmptySampleError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace rrls::cli
