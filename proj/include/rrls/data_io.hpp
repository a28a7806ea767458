#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rrls/common.hpp"

namespace rrls {

/// n x d feature matrix (one data point per row) with optional labels.
struct Dataset {
  RowMatrix features;
  std::optional<Vector> labels;
  std::vector<std::string> feature_names;

  Index n() const { return features.rows(); }
  Index d() const { return features.cols(); }

  /// Throws ArgumentError unless n >= 1, every entry is finite and labels
  /// (when present) have length n.
  void validate() const;
};

struct CategoricalExpansion {
  Index column = 0;             // column index in the input dataset
  std::vector<double> values;   // distinct values, ascending; arity = values.size()
};

/// Recorded affine normalization, replayable on held-out points.
struct PreprocessReport {
  Vector mean;
  Vector scale;
  std::vector<CategoricalExpansion> expanded_categoricals;
  /// Variance convention: population (divide by n).
  bool population_variance = true;
};

/// Reads comma-separated values. A first row containing a non-numeric cell is
/// taken as a header. Throws FormatError on ragged rows and ParseError on a
/// non-numeric cell.
Dataset load_csv(const std::string& path, std::optional<Index> label_column = std::nullopt);

/// Parses CSV text directly (same rules as load_csv).
Dataset parse_csv(const std::string& text, std::optional<Index> label_column = std::nullopt);

/// Reads the sparse `<label> <idx>:<val> ...` format with 1-based, strictly
/// increasing indices. Missing entries are zero and d is the largest index.
Dataset load_libsvm(const std::string& path);
Dataset parse_libsvm(const std::string& text);

void save_csv(const Dataset& data, const std::string& path);
std::string to_libsvm(const Dataset& data);
void save_libsvm(const Dataset& data, const std::string& path);

/// Loads by extension: `.csv` as CSV, anything else as LIBSVM.
Dataset load_auto(const std::string& path, std::optional<Index> label_column = std::nullopt);

/// Expands categorical columns into 0/1 indicators, then centers every column
/// and scales to unit population variance. Constant columns keep scale 1.
std::pair<Dataset, PreprocessReport> preprocess(const Dataset& data,
                                                const std::set<Index>& categorical_columns = {});

/// Applies a recorded report to new data with the original column layout.
/// Categorical values unseen at fit time map to all-zero indicators.
Dataset apply_preprocess(const Dataset& data, const PreprocessReport& report);

/// Metadata for the benchmark datasets used in the large-scale experiments.
struct BenchmarkDataset {
  std::string name;
  Index n;
  Index d;
};

const std::vector<BenchmarkDataset>& benchmark_registry();
std::optional<BenchmarkDataset> find_benchmark(const std::string& name);

}  // namespace rrls
