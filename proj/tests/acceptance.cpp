// Acceptance run: criteria 1-10 at full size, criterion 11 through the quick
// tier (every criterion, seeded, under the 60 s budget). One line each.
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include "rrls/verify.hpp"

namespace {

constexpr double kQuickBudgetSeconds = 60.0;

}  // namespace

int main(int argc, char** argv) {
  rrls::Tier tier = rrls::Tier::Full;
  std::uint64_t seed = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--quick") {
      tier = rrls::Tier::Quick;
    } else if (arg == "--seed" && i + 1 < argc) {
      seed = std::strtoull(argv[++i], nullptr, 10);
    } else {
      std::cerr << "usage: acceptance [--quick] [--seed N]\n";
      return 2;
    }
  }

  int failed = 0;
  const int last = rrls::criterion_count();
  for (int id = 1; id < last; ++id) {
    const rrls::CriterionResult r = rrls::run_criterion(id, tier, seed);
    if (!r.passed) ++failed;
    std::cout << r.line() << std::endl;
  }

  // Determinism criterion: the whole quick tier, timed, must pass.
  const auto start = std::chrono::steady_clock::now();
  rrls::VerifyOptions quick;
  quick.tier = rrls::Tier::Quick;
  quick.seed = seed;
  const auto results = rrls::run_verification(quick);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  int quick_failed = 0;
  std::string determinism;
  for (const auto& r : results) {
    if (!r.passed) ++quick_failed;
    if (r.id == last) determinism = r.detail;
  }
  rrls::CriterionResult c11;
  c11.id = last;
  c11.name = rrls::criterion_name(last);
  c11.seconds = seconds;
  c11.passed = quick_failed == 0 && seconds < kQuickBudgetSeconds;
  std::ostringstream detail;
  detail << "quick tier " << results.size() - quick_failed << "/" << results.size() << " passed in " << seconds
         << " s (budget " << kQuickBudgetSeconds << " s); " << determinism;
  c11.detail = detail.str();
  if (!c11.passed) ++failed;
  std::cout << c11.line() << std::endl;

  std::cout << (failed ? "FAIL" : "PASS") << " " << last - failed << "/" << last << " acceptance criteria"
            << std::endl;
  return failed ? 1 : 0;
}
