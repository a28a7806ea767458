#include "rrls/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace rrls {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::optional<double> to_number(std::string_view token) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  auto lines = split(text, '\n');
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  }
  return lines;
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write file: " + path);
  out << content;
}

}  // namespace

void Dataset::validate() const {
  if (n() < 1) throw ArgumentError("dataset must contain at least one point");
  if (!features.allFinite()) throw ArgumentError("dataset contains non-finite entries");
  if (labels && labels->size() != n()) {
    throw ArgumentError("label count " + std::to_string(labels->size()) +
                        " does not match point count " + std::to_string(n()));
  }
  if (!feature_names.empty() && static_cast<Index>(feature_names.size()) != d()) {
    throw ArgumentError("feature name count does not match dimension");
  }
}

Dataset parse_csv(const std::string& text, std::optional<Index> label_column) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
  std::size_t arity = 0;
  bool first = true;
  std::size_t line_no = 0;
  for (const auto raw : split_lines(text)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (first) {
      arity = cells.size();
      first = false;
      const bool numeric = std::all_of(cells.begin(), cells.end(),
                                       [](auto c) { return to_number(c).has_value(); });
      if (!numeric) {
        for (auto c : cells) header.emplace_back(trim(c));
        continue;
      }
    }
    if (cells.size() != arity) {
      throw FormatError("row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " fields, expected " + std::to_string(arity));
    }
    std::vector<double> row;
    row.reserve(arity);
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto v = to_number(cells[j]);
      if (!v) {
        throw ParseError("row " + std::to_string(line_no) + ", column " + std::to_string(j + 1) +
                         ": non-numeric cell '" + std::string(trim(cells[j])) + "'");
      }
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("no data rows");

  const auto total = static_cast<Index>(arity);
  if (label_column && (*label_column < 0 || *label_column >= total)) {
    throw ArgumentError("label column " + std::to_string(*label_column) + " out of range");
  }
  const Index d = label_column ? total - 1 : total;
  Dataset data;
  data.features.resize(static_cast<Index>(rows.size()), d);
  if (label_column) data.labels = Vector(static_cast<Index>(rows.size()));
  for (Index i = 0; i < static_cast<Index>(rows.size()); ++i) {
    Index out = 0;
    for (Index j = 0; j < total; ++j) {
      const double v = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (label_column && j == *label_column) {
        (*data.labels)(i) = v;
      } else {
        data.features(i, out++) = v;
      }
    }
  }
  if (!header.empty()) {
    for (Index j = 0; j < total; ++j) {
      if (!label_column || j != *label_column) {
        data.feature_names.push_back(header[static_cast<std::size_t>(j)]);
      }
    }
  }
  data.validate();
  return data;
}

Dataset load_csv(const std::string& path, std::optional<Index> label_column) {
  return parse_csv(read_file(path), label_column);
}

Dataset parse_libsvm(const std::string& text) {
  struct Entry {
    Index row;
    Index col;
    double value;
  };
  std::vector<Entry> entries;
  std::vector<double> labels;
  Index d = 0;
  std::size_t line_no = 0;
  for (const auto raw : split_lines(text)) {
    ++line_no;
    auto line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    std::istringstream tokens{std::string(line)};
    std::string token;
    tokens >> token;
    const auto label = to_number(token);
    if (!label) {
      throw ParseError("line " + std::to_string(line_no) + ": unparsable label '" + token + "'");
    }
    const auto row = static_cast<Index>(labels.size());
    labels.push_back(*label);
    Index previous = 0;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) {
        throw ParseError("line " + std::to_string(line_no) + ": token '" + token + "' is not idx:val");
      }
      const std::string_view idx_text(token.data(), colon);
      Index idx = 0;
      const auto [ptr, ec] = std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), idx);
      if (ec != std::errc() || ptr != idx_text.data() + idx_text.size() || idx < 1) {
        throw ParseError("line " + std::to_string(line_no) + ": bad index in '" + token + "'");
      }
      const auto value = to_number(std::string_view(token).substr(colon + 1));
      if (!value) {
        throw ParseError("line " + std::to_string(line_no) + ": bad value in '" + token + "'");
      }
      if (idx <= previous) {
        throw FormatError("line " + std::to_string(line_no) + ": index " + std::to_string(idx) +
                          " does not increase (previous " + std::to_string(previous) + ")");
      }
      previous = idx;
      d = std::max(d, idx);
      entries.push_back({row, idx - 1, *value});
    }
  }
  if (labels.empty()) throw FormatError("no data lines");

  Dataset data;
  data.features = RowMatrix::Zero(static_cast<Index>(labels.size()), d);
  for (const auto& e : entries) data.features(e.row, e.col) = e.value;
  data.labels = Eigen::Map<const Vector>(labels.data(), static_cast<Index>(labels.size()));
  data.validate();
  return data;
}

Dataset load_libsvm(const std::string& path) { return parse_libsvm(read_file(path)); }

std::string to_libsvm(const Dataset& data) {
  std::ostringstream out;
  for (Index i = 0; i < data.n(); ++i) {
    out << format_double(data.labels ? (*data.labels)(i) : 0.0);
    for (Index j = 0; j < data.d(); ++j) {
      const double v = data.features(i, j);
      if (v != 0.0) out << ' ' << (j + 1) << ':' << format_double(v);
    }
    out << '\n';
  }
  return out.str();
}

void save_libsvm(const Dataset& data, const std::string& path) { write_file(path, to_libsvm(data)); }

void save_csv(const Dataset& data, const std::string& path) {
  std::ostringstream out;
  const bool named = !data.feature_names.empty();
  if (named) {
    for (Index j = 0; j < data.d(); ++j) {
      if (j) out << ',';
      out << data.feature_names[static_cast<std::size_t>(j)];
    }
    if (data.labels) out << ",label";
    out << '\n';
  }
  for (Index i = 0; i < data.n(); ++i) {
    for (Index j = 0; j < data.d(); ++j) {
      if (j) out << ',';
      out << format_double(data.features(i, j));
    }
    if (data.labels) out << (data.d() ? "," : "") << format_double((*data.labels)(i));
    out << '\n';
  }
  write_file(path, out.str());
}

Dataset load_auto(const std::string& path, std::optional<Index> label_column) {
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  return csv ? load_csv(path, label_column) : load_libsvm(path);
}

namespace {

// Categorical expansion only; returns the expanded matrix and column names.
RowMatrix expand_categoricals(const Dataset& data, const std::vector<CategoricalExpansion>& cats,
                              std::vector<std::string>* names) {
  std::map<Index, const CategoricalExpansion*> by_column;
  for (const auto& c : cats) by_column[c.column] = &c;

  Index width = 0;
  for (Index j = 0; j < data.d(); ++j) {
    const auto it = by_column.find(j);
    width += it == by_column.end() ? 1 : static_cast<Index>(it->second->values.size());
  }
  RowMatrix out = RowMatrix::Zero(data.n(), width);
  Index col = 0;
  for (Index j = 0; j < data.d(); ++j) {
    const std::string base = data.feature_names.empty()
                                 ? "x" + std::to_string(j)
                                 : data.feature_names[static_cast<std::size_t>(j)];
    const auto it = by_column.find(j);
    if (it == by_column.end()) {
      out.col(col++) = data.features.col(j);
      if (names) names->push_back(base);
      continue;
    }
    const auto& values = it->second->values;
    for (Index i = 0; i < data.n(); ++i) {
      const auto pos = std::lower_bound(values.begin(), values.end(), data.features(i, j));
      if (pos != values.end() && *pos == data.features(i, j)) {
        out(i, col + static_cast<Index>(pos - values.begin())) = 1.0;
      }
    }
    if (names) {
      for (double v : values) names->push_back(base + "=" + format_double(v));
    }
    col += static_cast<Index>(values.size());
  }
  return out;
}

}  // namespace

std::pair<Dataset, PreprocessReport> preprocess(const Dataset& data,
                                                const std::set<Index>& categorical_columns) {
  data.validate();
  PreprocessReport report;
  for (const Index j : categorical_columns) {
    if (j < 0 || j >= data.d()) {
      throw ArgumentError("categorical column " + std::to_string(j) + " out of range");
    }
    std::vector<double> values(data.features.col(j).begin(), data.features.col(j).end());
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    report.expanded_categoricals.push_back({j, std::move(values)});
  }

  Dataset out;
  out.labels = data.labels;
  const bool keep_names = !data.feature_names.empty() || !categorical_columns.empty();
  std::vector<std::string> names;
  out.features = expand_categoricals(data, report.expanded_categoricals, keep_names ? &names : nullptr);
  if (keep_names) out.feature_names = std::move(names);

  const auto n = static_cast<double>(out.n());
  report.mean.resize(out.d());
  report.scale.resize(out.d());
  for (Index j = 0; j < out.d(); ++j) {
    auto column = out.features.col(j);
    const double mean = column.sum() / n;
    const double var = (column.array() - mean).square().sum() / n;
    const double sd = std::sqrt(var);
    const double magnitude = std::max(1.0, column.cwiseAbs().maxCoeff());
    const double scale = sd <= 1e-12 * magnitude ? 1.0 : sd;
    column = (column.array() - mean) / scale;
    report.mean(j) = mean;
    report.scale(j) = scale;
  }
  return {std::move(out), std::move(report)};
}

Dataset apply_preprocess(const Dataset& data, const PreprocessReport& report) {
  Dataset out;
  out.labels = data.labels;
  out.features = expand_categoricals(data, report.expanded_categoricals, nullptr);
  if (out.d() != report.mean.size()) {
    throw ArgumentError("dataset layout does not match the preprocessing report");
  }
  for (Index j = 0; j < out.d(); ++j) {
    out.features.col(j) = (out.features.col(j).array() - report.mean(j)) / report.scale(j);
  }
  return out;
}

const std::vector<BenchmarkDataset>& benchmark_registry() {
  static const std::vector<BenchmarkDataset> registry = {
      {"YearPredictionMSD", 515345, 90},
      {"Covertype", 581012, 54},
      {"Cod-RNA", 331152, 8},
      {"Adult", 48842, 110},
  };
  return registry;
}

std::optional<BenchmarkDataset> find_benchmark(const std::string& name) {
  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
  };
  for (const auto& b : benchmark_registry()) {
    if (lower(b.name) == lower(name)) return b;
  }
  return std::nullopt;
}

}  // namespace rrls
