// SPDX-License-Identifier: Apache-2.0
#include "patternpress/redundancy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "patternpress/error.hpp"
#include "patternpress/numerics.hpp"
#include "patternpress/oracle.hpp"
#include "patternpress/parallel.hpp"

namespace patternpress {

RedundancyReport pattern_redundancy(const Estimator& estimator,
                                    const PrevalenceProfile& profile) {
  RedundancyReport r;
  r.n = profile.n;
  r.m = profile.m;
  r.ln_p_upper = envelope_log_bound(profile).log_bound;
  r.ln_q = log_prob(estimator, profile);
  r.redundancy_nats = r.ln_p_upper - r.ln_q;
  r.per_symbol = r.n == 0 ? 0.0 : r.redundancy_nats / static_cast<double>(r.n);
  if (r.m >= 1) {
    if (const auto* p = std::get_if<CrpParams>(&estimator); p && r.n >= 16) {
      r.bound_nats = crp_bound_partialred(r.n, r.m, p->theta);
    } else if (const auto* p = std::get_if<PyParams>(&estimator); p && p->alpha > 0.0) {
      r.bound_nats = py_bound_upper(r.n, r.m, p->alpha, p->theta);
    }
  }
  return r;
}

RedundancyReport pattern_redundancy(const Estimator& estimator, const Pattern& pattern) {
  return pattern_redundancy(estimator, profile(pattern));
}

double crp_bound_partialred(std::uint64_t n, std::uint64_t m, double theta) {
  if (n < 16) throw DomainError("crp_bound_partialred: requires n >= 16");
  if (m < 1 || m > n) throw DomainError("crp_bound_partialred: requires 1 <= m <= n");
  if (!(theta > 0.0)) throw DomainError("crp_bound_partialred: theta must be > 0");
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return dm * std::log(dn / dm) + dm * std::log(dm / theta) +
         theta * std::log(2.0 + dn / theta);
}

double py_bound_upper(std::uint64_t n, std::uint64_t m, double alpha, double theta) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("py_bound_upper: alpha must lie in (0, 1)");
  if (!(theta > -alpha)) throw DomainError("py_bound_upper: theta must exceed -alpha");
  if (m < 1 || m > n) throw DomainError("py_bound_upper: requires 1 <= m <= n");
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  const double tb = std::ceil(theta);
  const double stick = tb > 0.0 ? tb * (std::log((tb + dn) / tb) + 1.0) : 0.0;
  return 2.0 * dm * std::log(dn / dm) - (dm - 2.0) * std::log((1.0 - alpha) * alpha) +
         stick + std::log(dm * dm / (theta + alpha)) - 2.0 * std::log1p(-alpha);
}

double crp_distinct_limit(std::uint64_t n) {
  if (n < 16) throw DomainError("crp_distinct_limit: requires n >= 16");
  const double ln = std::log(static_cast<double>(n));
  const double lln = std::log(ln);
  return static_cast<double>(n) * lln * lln / ln;
}

WitnessCodeLengths py_linear_witnesses(double alpha, double theta, std::uint64_t n) {
  validate(PyParams{alpha, theta});
  if (n < 2) throw DomainError("py_linear_witnesses: requires n >= 2");
  if (n > UINT32_MAX) throw TooLarge("py_linear_witnesses: n too large");
  const auto count = static_cast<std::uint32_t>(n);
  const PyParams p{alpha, theta};
  return {-py_log_prob(p, make_profile({{count, 1}})),
          -py_log_prob(p, make_profile({{1, count}}))};
}

double claim_constant(double alpha) { return std::max(0.5, alpha); }

double claim_lhs(std::uint64_t j, double alpha, double theta) {
  const double dj = static_cast<double>(j);
  const double d = theta + dj;
  return (dj - alpha) * (theta + dj * alpha) / (d * d);
}

bool claim_inequality_check(std::uint64_t j, double alpha, double theta) {
  if (j < 1) throw DomainError("claim: requires j >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("claim: requires 0 < alpha < 1");
  if (!(alpha + theta > 0.0)) throw DomainError("claim: requires alpha + theta > 0");
  return claim_lhs(j, alpha, theta) <= claim_constant(alpha) + 1e-12;
}

double expected_distinct_bound(double entropy_nats, std::uint64_t n) {
  if (!(entropy_nats >= 0.0)) throw DomainError("expected_distinct_bound: H must be >= 0");
  if (n < 2) throw DomainError("expected_distinct_bound: requires n >= 2");
  const double dn = static_cast<double>(n);
  return dn * entropy_nats / std::log(dn) + 1.0;
}

bool chebyshev_sum_check(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty())
    throw DomainError("chebyshev_sum_check: sequences must be non-empty and equal length");
  for (const auto* v : {&x, &y}) {
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!((*v)[i] >= 0.0)) throw DomainError("chebyshev_sum_check: negative entry");
      if (i > 0 && (*v)[i] > (*v)[i - 1])
        throw DomainError("chebyshev_sum_check: sequence is not non-increasing");
    }
  }
  KahanSum sx, sy, sxy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx.add(x[i]);
    sy.add(y[i]);
    sxy.add(x[i] * y[i]);
  }
  const double n = static_cast<double>(x.size());
  return sxy.value() / n >= (sx.value() / n) * (sy.value() / n) - 1e-12;
}

double markov_distinct_tail(double entropy_nats, std::uint64_t n) {
  if (!(entropy_nats >= 0.0)) throw DomainError("markov_distinct_tail: H must be >= 0");
  if (n < 16) throw DomainError("markov_distinct_tail: requires n >= 16");
  const double dn = static_cast<double>(n);
  const double ln = std::log(dn);
  const double lln2 = std::log(ln) * std::log(ln);
  return entropy_nats / lln2 + ln / (dn * lln2);
}

const char* mode_name(PatternProbMode mode) {
  switch (mode) {
    case PatternProbMode::Auto: return "auto";
    case PatternProbMode::Exact: return "exact";
    case PatternProbMode::SequenceLowerBound: return "sequence-lower-bound";
    case PatternProbMode::Envelope: return "envelope";
  }
  return "unknown";
}

double pattern_log_prob_lower(const DiscreteDistribution& dist,
                              const PrevalenceProfile& profile) {
  std::vector<double> atoms;
  for (double p : dist.probs()) {
    if (p > 0.0) atoms.push_back(p);
  }
  if (profile.m > atoms.size()) return kNegInf;
  std::sort(atoms.begin(), atoms.end(), std::greater<>());
  // Multiplicities in decreasing order against atoms in decreasing order.
  double lp = 0.0;
  std::size_t atom = 0;
  for (auto it = profile.counts.rbegin(); it != profile.counts.rend(); ++it) {
    for (std::uint32_t k = 0; k < it->second; ++k) lp += it->first * std::log(atoms[atom++]);
  }
  return lp;
}

std::vector<double> log_prob_batch(const Estimator& estimator,
                                   const std::vector<PrevalenceProfile>& profiles) {
  std::vector<double> out(profiles.size());
  const auto* config = std::get_if<MixtureConfig>(&estimator);
  if (config == nullptr) {
    for (std::size_t i = 0; i < profiles.size(); ++i)
      out[i] = log_prob(estimator, profiles[i]);
    return out;
  }
  std::map<std::uint64_t, std::vector<std::size_t>> by_length;
  for (std::size_t i = 0; i < profiles.size(); ++i) by_length[profiles[i].n].push_back(i);
  for (const auto& [n, indices] : by_length) {
    std::vector<std::uint32_t> ms;
    for (std::size_t i : indices) ms.push_back(profiles[i].m);
    std::sort(ms.begin(), ms.end());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    const std::vector<double> evidence = mixture_log_evidence(*config, n, ms);
    for (std::size_t i : indices) {
      const auto k = std::lower_bound(ms.begin(), ms.end(), profiles[i].m) - ms.begin();
      double lp = evidence[k];
      for (auto [mu, phi] : profiles[i].counts) lp += phi * log_factorial(mu - 1.0);
      out[i] = lp;
    }
  }
  return out;
}

AverageRedundancy average_redundancy_mc(const DiscreteDistribution& dist,
                                        const Estimator& estimator, std::uint64_t n,
                                        std::uint64_t trials, std::uint64_t seed,
                                        PatternProbMode mode) {
  validate(estimator);
  if (trials == 0) throw DomainError("average_redundancy_mc: trials must be >= 1");
  if (n == 0) throw DomainError("average_redundancy_mc: n must be >= 1");

  std::vector<PrevalenceProfile> profiles(trials);
  std::vector<double> ln_p(trials);
  std::vector<PatternProbMode> used(trials);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng(seed, t);
    std::vector<std::uint64_t> draws(n);
    for (auto& x : draws) x = dist.sample(rng);
    profiles[t] = profile(extract_pattern(draws));
    PatternProbMode m = mode;
    if (m == PatternProbMode::Auto) {
      m = exact_work(dist, profiles[t]) <= kExactWorkLimit
              ? PatternProbMode::Exact
              : PatternProbMode::SequenceLowerBound;
    }
    used[t] = m;
    switch (m) {
      case PatternProbMode::Exact:
        ln_p[t] = pattern_log_prob_exact(dist, profiles[t]);
        break;
      case PatternProbMode::SequenceLowerBound:
        ln_p[t] = pattern_log_prob_lower(dist, profiles[t]);
        break;
      default:
        ln_p[t] = envelope_log_bound(profiles[t]).log_bound;
        break;
    }
  });

  const std::vector<double> ln_q = log_prob_batch(estimator, profiles);
  AverageRedundancy result;
  result.n = n;
  result.trials = trials;
  KahanSum sum, sum_sq;
  const double dn = static_cast<double>(n);
  for (std::size_t t = 0; t < trials; ++t) {
    const double d = (ln_p[t] - ln_q[t]) / dn;
    sum.add(d);
    sum_sq.add(d * d);
    switch (used[t]) {
      case PatternProbMode::Exact: ++result.exact_trials; break;
      case PatternProbMode::SequenceLowerBound: ++result.lower_bound_trials; break;
      default: ++result.envelope_trials; break;
    }
  }
  const double dt = static_cast<double>(trials);
  result.per_symbol = sum.value() / dt;
  if (trials > 1) {
    const double var =
        std::max(0.0, (sum_sq.value() - dt * result.per_symbol * result.per_symbol) / (dt - 1));
    result.std_error = std::sqrt(var / dt);
  }
  const int kinds = (result.exact_trials > 0) + (result.lower_bound_trials > 0) +
                    (result.envelope_trials > 0);
  if (kinds > 1) {
    result.mode = "mixed";
  } else if (result.exact_trials > 0) {
    result.mode = mode_name(PatternProbMode::Exact);
  } else if (result.lower_bound_trials > 0) {
    result.mode = mode_name(PatternProbMode::SequenceLowerBound);
  } else {
    result.mode = mode_name(PatternProbMode::Envelope);
  }
  return result;
}

}  // namespace patternpress
