// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "patternpress/estimators.hpp"
#include "patternpress/pattern.hpp"
#include "patternpress/rng.hpp"

namespace patternpress {

// Finite distribution on the labels 1..k.
class DiscreteDistribution {
 public:
  // Throws DomainError unless every entry is >= 0 and the sum is 1 +- 1e-12.
  explicit DiscreteDistribution(std::vector<double> probs);

  static DiscreteDistribution point_mass();
  static DiscreteDistribution uniform(std::uint32_t k);
  // p_i proportional to i^-s, i = 1..k.
  static DiscreteDistribution zipf(double s, std::uint32_t k);
  // p_i = q (1-q)^(i-1). The tail beyond the first atom whose remaining mass
  // drops below 2^-60 is folded into that atom.
  static DiscreteDistribution geometric(double q);
  // Normalizes arbitrary non-negative weights.
  static DiscreteDistribution from_weights(std::vector<double> weights);

  std::size_t support_size() const noexcept { return probs_.size(); }
  const std::vector<double>& probs() const noexcept { return probs_; }
  double operator[](std::size_t i) const noexcept { return probs_[i]; }
  // Shannon entropy in nats.
  double entropy() const;

  // Label in [1, k] drawn with probability p_label.
  std::uint32_t sample(Rng& rng) const;

 private:
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

struct StickBreakingWeights {
  std::vector<double> weights;
  double residual = 1.0;
};

// n i.i.d. labels from dist; deterministic given seed.
std::vector<std::uint64_t> sample_iid(const DiscreteDistribution& dist, std::size_t n,
                                      std::uint64_t seed);

// GEM(theta) stick-breaking truncated after T sticks: W_i ~ Beta(1, theta),
// p_i = W_i prod_{j<i} (1 - W_j).
StickBreakingWeights gem_weights(double theta, std::size_t T, std::uint64_t seed);
// Two-parameter version with W_i ~ Beta(1 - alpha, theta + i alpha).
StickBreakingWeights py_weights(double alpha, double theta, std::size_t T,
                                std::uint64_t seed);

// Draws a pattern by chaining the predictive law of the CRP / PY process.
Pattern sample_crp_partition(const SequentialParams& params, std::size_t n,
                             std::uint64_t seed);
Pattern sample_crp_partition(const SequentialParams& params, std::size_t n, Rng& rng);

// Data source for simulations: a fixed finite distribution (sampled i.i.d.)
// or an exchangeable partition process (sampled sequentially).
using Source = std::variant<DiscreteDistribution, CrpParams, PyParams>;

// Parses "uniform:k", "zipf:s:k", "geometric:q", "dirichlet-stick:theta:T",
// "py-stick:alpha:theta:T", "crp:theta" and "py:alpha:theta". Stick-breaking
// sources draw their weights once from `seed` and append the residual mass
// as a final atom. Throws DomainError on malformed specifiers.
Source parse_source(std::string_view spec, std::uint64_t seed = kDefaultSeed);

Pattern sample_pattern(const Source& source, std::size_t n, Rng& rng);
Pattern sample_pattern(const Source& source, std::size_t n, std::uint64_t seed,
                       std::uint64_t stream = 0);

}  // namespace patternpress
