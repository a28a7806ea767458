#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rrls {

/// Seeded property suite behind the acceptance criteria. The quick tier runs
/// every criterion on reduced instances; the full tier uses the published
/// sizes and trial counts.
enum class Tier { Quick, Full };

std::string to_string(Tier tier);
Tier parse_tier(const std::string& text);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;

  /// "PASS C04 spectral-guarantee (12.3 s): ..." style line.
  std::string line() const;
};

struct VerifyOptions {
  Tier tier = Tier::Quick;
  std::uint64_t seed = 0;
  std::vector<int> only;  // empty: all criteria
};

/// Number of criteria (ids 1..count).
int criterion_count();
std::string criterion_name(int id);

CriterionResult run_criterion(int id, Tier tier, std::uint64_t seed);

/// Runs the selected criteria in id order, reporting each as it completes.
std::vector<CriterionResult> run_verification(const VerifyOptions& options,
                                              const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace rrls
