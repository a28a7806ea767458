#include "rrls/kernels.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace rrls {

namespace {

void check_kind(const KernelSpec::Kind& kind) {
  if (const auto* g = std::get_if<GaussianKernel>(&kind)) {
    if (!(g->sigma > 0.0) || !std::isfinite(g->sigma)) {
      throw ArgumentError("gaussian kernel requires sigma > 0");
    }
  } else if (const auto* p = std::get_if<PolynomialKernel>(&kind)) {
    if (p->degree < 1) throw ArgumentError("polynomial kernel requires degree >= 1");
    if (!(p->offset >= 0.0) || !std::isfinite(p->offset)) {
      throw ArgumentError("polynomial kernel requires offset >= 0");
    }
  }
}

std::string shortest(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  // Prefer the short form when it round-trips.
  std::ostringstream shorter;
  shorter << v;
  double back = 0.0;
  const auto s = shorter.str();
  std::from_chars(s.data(), s.data() + s.size(), back);
  return back == v ? s : ss.str();
}

// Evaluates one kernel value between two contiguous d-vectors.
struct Evaluator {
  const KernelSpec::Kind& kind;

  double operator()(const double* x, const double* y, Index d) const {
    return std::visit(
        [&](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, GaussianKernel>) {
            double sq = 0.0;
            for (Index t = 0; t < d; ++t) {
              const double diff = x[t] - y[t];
              sq += diff * diff;
            }
            return std::exp(-sq / (2.0 * k.sigma * k.sigma));
          } else {
            double dot = 0.0;
            for (Index t = 0; t < d; ++t) dot += x[t] * y[t];
            if constexpr (std::is_same_v<K, LinearKernel>) {
              return dot;
            } else {
              const double base = dot + k.offset;
              double out = 1.0;
              for (int e = 0; e < k.degree; ++e) out *= base;
              return out;
            }
          }
        },
        kind);
  }
};

void check_indices(std::span<const Index> idx, Index n) {
  for (const Index i : idx) {
    if (i < 0 || i >= n) {
      throw ArgumentError("index " + std::to_string(i) + " out of range [0, " + std::to_string(n) + ")");
    }
  }
}

RowMatrix gather_rows(const RowMatrix& x, std::span<const Index> idx) {
  RowMatrix out(static_cast<Index>(idx.size()), x.cols());
  for (std::size_t j = 0; j < idx.size(); ++j) out.row(static_cast<Index>(j)) = x.row(idx[j]);
  return out;
}

}  // namespace

KernelSpec::KernelSpec(Kind kind) : kind_(kind) { check_kind(kind_); }

double KernelSpec::sigma() const {
  if (const auto* g = std::get_if<GaussianKernel>(&kind_)) return g->sigma;
  throw ArgumentError("kernel '" + to_string() + "' has no width parameter");
}

KernelSpec KernelSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  std::map<std::string, double> params;
  if (colon != std::string::npos) {
    std::stringstream rest(text.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ArgumentError("kernel parameter '" + item + "' is not key=value");
      const std::string key = item.substr(0, eq);
      const std::string value = item.substr(eq + 1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ArgumentError("kernel parameter '" + key + "' has non-numeric value '" + value + "'");
      }
      params[key] = v;
    }
  }
  auto take = [&](const std::string& key) -> std::optional<double> {
    const auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    const double v = it->second;
    params.erase(it);
    return v;
  };
  KernelSpec spec;
  if (name == "gaussian" || name == "rbf") {
    const auto sigma = take("sigma");
    if (!sigma) throw ArgumentError("gaussian kernel requires sigma=<value>");
    spec = gaussian(*sigma);
  } else if (name == "linear") {
    spec = linear();
  } else if (name == "poly" || name == "polynomial") {
    const auto degree = take("degree");
    if (!degree) throw ArgumentError("polynomial kernel requires degree=<int>");
    if (*degree != std::floor(*degree)) throw ArgumentError("polynomial degree must be an integer");
    spec = polynomial(static_cast<int>(*degree), take("offset").value_or(0.0));
  } else {
    throw ArgumentError("unknown kernel '" + name + "'");
  }
  if (!params.empty()) throw ArgumentError("unknown kernel parameter '" + params.begin()->first + "'");
  return spec;
}

std::string KernelSpec::to_string() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, GaussianKernel>) {
          return "gaussian:sigma=" + shortest(k.sigma);
        } else if constexpr (std::is_same_v<K, LinearKernel>) {
          return "linear";
        } else {
          return "poly:degree=" + std::to_string(k.degree) + ",offset=" + shortest(k.offset);
        }
      },
      kind_);
}

double eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y,
            EvalCounter& counter) {
  if (x.size() != y.size()) {
    throw ArgumentError("kernel arguments differ in dimension (" + std::to_string(x.size()) + " vs " +
                        std::to_string(y.size()) + ")");
  }
  counter.add(1);
  return Evaluator{spec.kind()}(x.data(), y.data(), static_cast<Index>(x.size()));
}

Matrix kernel_cross(const KernelSpec& spec, const RowMatrix& queries, const Dataset& data,
                    std::span<const Index> cols, EvalCounter& counter) {
  if (queries.cols() != data.d()) throw ArgumentError("query dimension does not match dataset");
  check_indices(cols, data.n());
  const RowMatrix targets = gather_rows(data.features, cols);
  const Evaluator k{spec.kind()};
  const Index d = data.d();
  Matrix out(queries.rows(), static_cast<Index>(cols.size()));
  for (Index j = 0; j < out.cols(); ++j) {
    const double* y = targets.row(j).data();
    for (Index i = 0; i < out.rows(); ++i) out(i, j) = k(queries.row(i).data(), y, d);
  }
  counter.add(static_cast<std::uint64_t>(out.size()));
  return out;
}

Matrix kernel_block(const KernelSpec& spec, const Dataset& data, std::span<const Index> rows,
                    std::span<const Index> cols, EvalCounter& counter) {
  check_indices(rows, data.n());
  return kernel_cross(spec, gather_rows(data.features, rows), data, cols, counter);
}

Matrix kernel_columns(const KernelSpec& spec, const Dataset& data, std::span<const Index> landmarks,
                      EvalCounter& counter) {
  return kernel_cross(spec, data.features, data, landmarks, counter);
}

Vector kernel_diagonal(const KernelSpec& spec, const Dataset& data, std::span<const Index> rows,
                       EvalCounter& counter) {
  check_indices(rows, data.n());
  const Evaluator k{spec.kind()};
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double* x = data.features.row(rows[i]).data();
    out(static_cast<Index>(i)) = k(x, x, data.d());
  }
  counter.add(rows.size());
  return out;
}

Vector kernel_diagonal(const KernelSpec& spec, const Dataset& data, EvalCounter& counter) {
  std::vector<Index> all(static_cast<std::size_t>(data.n()));
  for (Index i = 0; i < data.n(); ++i) all[static_cast<std::size_t>(i)] = i;
  return kernel_diagonal(spec, data, all, counter);
}

Matrix gram_matrix(const KernelSpec& spec, const Dataset& data, EvalCounter& counter) {
  std::vector<Index> all(static_cast<std::size_t>(data.n()));
  for (Index i = 0; i < data.n(); ++i) all[static_cast<std::size_t>(i)] = i;
  return kernel_columns(spec, data, all, counter);
}

}  // namespace rrls
