// SPDX-License-Identifier: Apache-2.0
//
// Exact reference computations at small n.
//
// p(psi) for a known distribution sums prod_s p_{sigma(s)}^{mu_s} over the
// injective maps sigma from pattern symbols into the support. The sum is
// evaluated by dynamic programming over atom groups (atoms of equal mass)
// with the state "how many symbols of each multiplicity class are still
// unassigned", which collapses interchangeable symbols and atoms.
#pragma once

#include <cstdint>
#include <vector>

#include "patternpress/pattern.hpp"
#include "patternpress/samplers.hpp"

namespace patternpress {

// Work limit for the dynamic program, in state transitions.
inline constexpr double kExactWorkLimit = 1e8;

// Estimated transition count of pattern_log_prob_exact for (dist, profile).
double exact_work(const DiscreteDistribution& dist, const PrevalenceProfile& profile);

// ln p(psi); -inf when the pattern has more symbols than the support has
// positive atoms. Throws TooLarge when exact_work exceeds kExactWorkLimit.
double pattern_log_prob_exact(const DiscreteDistribution& dist,
                              const PrevalenceProfile& profile);
double pattern_log_prob_exact(const DiscreteDistribution& dist, const Pattern& pattern);
double pattern_prob_exact(const DiscreteDistribution& dist, const Pattern& pattern);

struct EnvelopeBound {
  // ln( prod_mu [mu!]^phi_mu phi_mu! / n! ), always <= 0.
  double log_bound = 0.0;
};

EnvelopeBound envelope_log_bound(const PrevalenceProfile& profile);

inline constexpr std::size_t kMaxProbLength = 10;
inline constexpr std::uint32_t kMaxProbBudget = 16;
inline constexpr std::uint32_t kDiffuseAtoms = 1000;

struct MaxProbResult {
  // Best pattern probability found; a lower bound on sup_p p(psi).
  double probability = 0.0;
  // Discrete atoms of the maximizing distribution (support_budget entries,
  // possibly zero) and the total mass spread over kDiffuseAtoms equal atoms.
  std::vector<double> atoms;
  double diffuse = 0.0;
};

// Numerical maximization of p(psi) over distributions with at most
// support_budget atoms plus a diffuse block. Multi-start projected gradient
// ascent, plus a dense simplex grid when support_budget <= 3. Warm-started
// from smaller budgets, so the result is non-decreasing in support_budget.
// Throws TooLarge for n > kMaxProbLength or support_budget > kMaxProbBudget,
// DomainError when support_budget < m.
MaxProbResult max_pattern_prob(const Pattern& pattern, std::uint32_t support_budget,
                               std::uint64_t seed = 0x5EED);

}  // namespace patternpress
