#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace kdvlab {

inline constexpr int kAcceptanceCriteria = 15;

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  /// Measured quantities behind the verdict.
  std::string detail;
  double seconds = 0.0;
};

/// Runs one criterion (1..15). Randomized probes draw from `seed`. Exceptions
/// thrown inside a criterion turn into a failure with the message as detail.
CriterionResult run_criterion(int id, std::uint64_t seed = 0);

/// Runs the listed criteria, or all of them when `ids` is empty.
std::vector<CriterionResult> run_acceptance(std::uint64_t seed = 0, std::span<const int> ids = {});

/// One "PASS"/"FAIL" line per result, then a summary line.
void write_table(std::ostream& out, std::span<const CriterionResult> results);

bool all_passed(std::span<const CriterionResult> results);

}  // namespace kdvlab
