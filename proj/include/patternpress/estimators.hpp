// SPDX-License-Identifier: Apache-2.0
//
// Pattern probability estimators: the Chinese restaurant process (Ewens
// sampling formula), the two-parameter Pitman-Yor process, and a weighted
// mixture of CRP estimators over the grid theta = i / ln j.
//
// Every log-probability is a natural log. Closed forms depend only on the
// prevalence profile of a pattern; the sequential forms chain the one-step
// predictive laws and must agree with the closed forms.
#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "patternpress/pattern.hpp"

namespace patternpress {

struct CrpParams {
  double theta = 1.0;
};

struct PyParams {
  double alpha = 0.5;
  double theta = 0.5;
};

// Truncation of the mixture grid: i in [1, i_max], j in [2, j_max].
struct MixtureConfig {
  std::uint32_t i_max = 1;
  std::uint32_t j_max = 2;
};

using Estimator = std::variant<CrpParams, PyParams, MixtureConfig>;
using SequentialParams = std::variant<CrpParams, PyParams>;

// Throw DomainError unless the parameters satisfy their invariants:
// theta > 0 for the CRP, 0 <= alpha < 1 and theta > -alpha for PY,
// i_max >= 1 and j_max >= 2 for the mixture.
void validate(const CrpParams& p);
void validate(const PyParams& p);
void validate(const MixtureConfig& c);
void validate(const Estimator& e);

// One-step predictive law. A previously seen symbol with multiplicity mu has
// probability per_count * mu - discount; a new symbol has new_symbol.
// Sum over seen symbols plus new_symbol is 1.
struct StepLaw {
  double per_count = 0.0;
  double discount = 0.0;
  double new_symbol = 1.0;

  double seen(std::uint32_t mu) const { return per_count * mu - discount; }
};

struct PredictiveDistribution {
  // seen[s-1] is the probability that the next symbol is s.
  std::vector<double> seen;
  double new_symbol = 1.0;
};

double crp_log_prob(const CrpParams& params, const PrevalenceProfile& profile);
double py_log_prob(const PyParams& params, const PrevalenceProfile& profile);

// multiplicities[s-1] = occurrences of symbol s in the observed prefix.
PredictiveDistribution crp_predictive(const CrpParams& params,
                                      std::span<const std::uint32_t> multiplicities);
PredictiveDistribution py_predictive(const PyParams& params,
                                     std::span<const std::uint32_t> multiplicities);

// Step law after observing n symbols with m distinct ones.
StepLaw crp_step(const CrpParams& params, std::uint64_t n);
StepLaw py_step(const PyParams& params, std::uint64_t n, std::uint32_t m);

double sequential_log_prob(const SequentialParams& params, const Pattern& pattern);

// c_{i,j} = 1 / (i (i+1) j (j+1)) and its natural log.
double mixture_weight(std::uint32_t i, std::uint32_t j);
double mixture_log_weight(std::uint32_t i, std::uint32_t j);
// ln of the sum of c_{i,j} over the truncated grid.
double mixture_log_mass(const MixtureConfig& config);
// Default truncation for scoring a length-n pattern: i_max = j_max = n, so
// the term theta = m / ln n is always on the grid.
MixtureConfig default_mixture_config(std::uint64_t n);

// ln sum_{i,j} c_{i,j} theta^m Gamma(theta) / Gamma(theta + n) with
// theta = i / ln j, for each requested distinct count m. This is the part of
// the mixture log-probability that depends on the profile only through
// (n, m); computing several m at once shares the grid evaluation.
std::vector<double> mixture_log_evidence(const MixtureConfig& config,
                                         std::uint64_t n,
                                         std::span<const std::uint32_t> ms);

double mixture_log_prob(const MixtureConfig& config, const PrevalenceProfile& profile);
double mixture_log_prob(const MixtureConfig& config, const Pattern& pattern);

// Sequential Bayes mixture: the prior weights c_{i,j} are normalized, each
// component's weight is updated by its realized step probability, and the
// result is shifted back by ln(sum c_{i,j}) so it equals mixture_log_prob.
double sequential_mixture_log_prob(const MixtureConfig& config, const Pattern& pattern);

// theta = max(m / ln n, 1e-6) for n >= 2; DomainError for n < 2 or m > n.
CrpParams select_crp_theta(std::uint64_t n, std::uint32_t m);
inline constexpr double kMinTheta = 1e-6;

double log_prob(const Estimator& estimator, const PrevalenceProfile& profile);
double log_prob(const Estimator& estimator, const Pattern& pattern);

// Streaming predictor shared by the coder and the sequential scorers.
class SequentialPredictor {
 public:
  explicit SequentialPredictor(const Estimator& estimator);

  // Law of the next symbol given everything observed so far.
  StepLaw law() const;
  // Records the next symbol; mu_before is its multiplicity before this step
  // (0 for a new symbol).
  void observe(std::uint32_t mu_before);

  std::uint64_t observed() const noexcept { return n_; }
  std::uint32_t distinct() const noexcept { return m_; }

 private:
  Estimator estimator_;
  std::uint64_t n_ = 0;
  std::uint32_t m_ = 0;
  // Mixture state: component thetas and unnormalized log weights.
  std::vector<double> thetas_;
  std::vector<double> log_thetas_;
  std::vector<double> log_weights_;
  StepLaw cached_;
  void refresh_mixture_law();
};

}  // namespace patternpress
