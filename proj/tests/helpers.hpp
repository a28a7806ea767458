#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "rrls/data_io.hpp"

namespace test {

inline rrls::Dataset gaussian_data(rrls::Index n, rrls::Index d, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  rrls::Dataset data;
  data.features.resize(n, d);
  for (rrls::Index i = 0; i < n; ++i) {
    for (rrls::Index j = 0; j < d; ++j) data.features(i, j) = normal(rng);
  }
  return data;
}

inline rrls::Dataset from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  rrls::Dataset data;
  const auto d = static_cast<rrls::Index>(rows.begin()->size());
  data.features.resize(static_cast<rrls::Index>(rows.size()), d);
  rrls::Index i = 0;
  for (const auto& row : rows) {
    rrls::Index j = 0;
    for (double v : row) data.features(i, j++) = v;
    ++i;
  }
  return data;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("rrls_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace test
