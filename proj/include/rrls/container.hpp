#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "rrls/baselines.hpp"
#include "rrls/downstream.hpp"
#include "rrls/kernels.hpp"
#include "rrls/nystrom.hpp"

namespace rrls {

/// Binary model file: magic "NYSF", u32 version, then tagged sections
/// (4-byte tag, u64 payload length, payload). Little-endian host layout.
///   FACT  n, s, rank, kernel config string, landmark indices, C (row-major), Winv
///   KRRM  lambda, alpha, predictor weights (requires FACT)
///   RFFM  sigma, D, d, frequencies (row-major), phases
/// Unknown sections are skipped on read.
inline constexpr std::uint32_t kContainerVersion = 1;

struct ModelContainer {
  KernelSpec kernel;
  std::optional<NystromFactors> factors;
  std::optional<KRRModel> krr;
  std::optional<RFFMap> rff;
};

void write_container(std::ostream& out, const ModelContainer& model);
ModelContainer read_container(std::istream& in);

void save_container(const ModelContainer& model, const std::string& path);
ModelContainer load_container(const std::string& path);

}  // namespace rrls
