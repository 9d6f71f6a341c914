// SPDX-License-Identifier: Apache-2.0
//
// Redundancy of pattern estimators and the bounds they are compared with.
// All quantities are in nats.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "patternpress/estimators.hpp"
#include "patternpress/pattern.hpp"
#include "patternpress/samplers.hpp"

namespace patternpress {

struct RedundancyReport {
  std::uint64_t n = 0;
  std::uint32_t m = 0;
  double ln_p_upper = 0.0;  // envelope bound on sup_p ln p(psi)
  double ln_q = 0.0;
  double redundancy_nats = 0.0;  // ln_p_upper - ln_q
  // crp_bound_partialred for the CRP (n >= 16), py_bound_upper for PY with
  // alpha > 0; empty when no bound applies.
  std::optional<double> bound_nats;
  double per_symbol = 0.0;  // redundancy_nats / n, 0 for the empty pattern
};

RedundancyReport pattern_redundancy(const Estimator& estimator, const Pattern& pattern);
RedundancyReport pattern_redundancy(const Estimator& estimator,
                                    const PrevalenceProfile& profile);

// m ln(n/m) + m ln(m/theta) + theta ln(2 + n/theta). At theta = m / ln n
// this is m ln(n/m) + m ln ln n + (m / ln n) ln(2 + n ln n / m).
// DomainError unless 1 <= m <= n, n >= 16 and theta > 0.
double crp_bound_partialred(std::uint64_t n, std::uint64_t m, double theta);

// 2m ln(n/m) + (m-2) ln(1/((1-a)a)) + tb ln((tb+n)e/tb) + ln(m^2/(theta+a))
// + ln(1/(1-a)^2) with tb = ceil(theta); the tb term is 0 when tb <= 0.
// DomainError unless 0 < alpha < 1, theta > -alpha and 1 <= m <= n.
double py_bound_upper(std::uint64_t n, std::uint64_t m, double alpha, double theta);

// m = n (ln ln n)^2 / ln n, the largest distinct count covered by the CRP
// bound check. Requires n >= 16.
double crp_distinct_limit(std::uint64_t n);

struct WitnessCodeLengths {
  double all_same = 0.0;      // -ln q_PY(1 1 ... 1)
  double all_distinct = 0.0;  // -ln q_PY(1 2 ... n)
  double sum() const { return all_same + all_distinct; }
};

// DomainError for invalid parameters or n < 2.
WitnessCodeLengths py_linear_witnesses(double alpha, double theta, std::uint64_t n);

// max{1/2, alpha}
double claim_constant(double alpha);
// (j - alpha)(theta + j alpha) / (theta + j)^2.
double claim_lhs(std::uint64_t j, double alpha, double theta);
// claim_lhs <= claim_constant + 1e-12. DomainError unless j >= 1,
// 0 < alpha < 1 and alpha + theta > 0.
bool claim_inequality_check(std::uint64_t j, double alpha, double theta);

// n H / ln n + 1. DomainError for H < 0 or n < 2.
double expected_distinct_bound(double entropy_nats, std::uint64_t n);

// mean(x y) >= mean(x) mean(y) - 1e-12 for two non-increasing non-negative
// sequences of equal length. DomainError otherwise.
bool chebyshev_sum_check(const std::vector<double>& x, const std::vector<double>& y);

// H / (ln ln n)^2 + ln n / (n (ln ln n)^2) bounds P(M_n > crp_distinct_limit(n)).
// DomainError for H < 0 or n < 16.
double markov_distinct_tail(double entropy_nats, std::uint64_t n);

enum class PatternProbMode {
  Auto,                // exact when within the work guard, else the lower bound
  Exact,               // pattern_log_prob_exact; TooLarge when over the guard
  SequenceLowerBound,  // largest single term: most frequent symbol on largest atom
  Envelope,            // envelope_log_bound, an upper proxy
};

const char* mode_name(PatternProbMode mode);

struct AverageRedundancy {
  std::uint64_t n = 0;
  std::uint64_t trials = 0;
  double per_symbol = 0.0;  // mean over trials of (ln p - ln q) / n
  double std_error = 0.0;
  // "exact", "sequence-lower-bound", "envelope", or "mixed" when Auto fell
  // back on some trials.
  std::string mode;
  std::uint64_t exact_trials = 0;
  std::uint64_t lower_bound_trials = 0;
  std::uint64_t envelope_trials = 0;
};

// Monte Carlo estimate of the per-symbol divergence D(p_psi || q) / n for
// patterns of n i.i.d. draws from dist. Trial t uses Rng(seed, t).
AverageRedundancy average_redundancy_mc(const DiscreteDistribution& dist,
                                        const Estimator& estimator, std::uint64_t n,
                                        std::uint64_t trials, std::uint64_t seed,
                                        PatternProbMode mode = PatternProbMode::Auto);

// Largest term in the sum defining p(psi): symbols sorted by multiplicity
// matched to atoms sorted by mass. A lower bound on ln p(psi).
double pattern_log_prob_lower(const DiscreteDistribution& dist,
                              const PrevalenceProfile& profile);

// log_prob for many profiles; mixture evidence is shared across equal (n, m).
std::vector<double> log_prob_batch(const Estimator& estimator,
                                   const std::vector<PrevalenceProfile>& profiles);

}  // namespace patternpress
