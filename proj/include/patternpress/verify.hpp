// SPDX-License-Identifier: Apache-2.0
//
// The invariant suite run by `patternpress verify` and the acceptance binary.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "patternpress/rng.hpp"

namespace patternpress {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct SuiteEntry {
  std::string_view name;
  std::string_view title;
};

// In run order: normalization, sequential, exchangeability, envelope,
// crp-bound, py-upper, linear, claim, hrate, growth, weak-universality,
// codec, bell.
const std::vector<SuiteEntry>& verify_suites();

// Runs one suite; DomainError for an unknown name.
CheckResult run_check(std::string_view name, std::uint64_t seed = kDefaultSeed);
std::vector<CheckResult> run_all_checks(std::uint64_t seed = kDefaultSeed);

// Bell numbers B_0..B_n by the Bell triangle.
std::vector<std::uint64_t> bell_numbers(std::size_t n);

}  // namespace patternpress
