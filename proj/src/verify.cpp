// SPDX-License-Identifier: Apache-2.0
#include "patternpress/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "patternpress/coder.hpp"
#include "patternpress/error.hpp"
#include "patternpress/estimators.hpp"
#include "patternpress/numerics.hpp"
#include "patternpress/oracle.hpp"
#include "patternpress/parallel.hpp"
#include "patternpress/redundancy.hpp"
#include "patternpress/samplers.hpp"

namespace patternpress {
namespace {

using Counts = std::map<std::uint32_t, std::uint32_t>;

class Detail {
 public:
  template <class T>
  Detail& operator<<(const T& v) {
    out_ << v;
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_ = [] {
    std::ostringstream s;
    s.precision(4);
    return s;
  }();
};

CheckResult make_result(bool passed, const Detail& d) { return {"", passed, d.str(), 0.0}; }

// Patterns for the random checks: CRP / PY partitions or i.i.d. draws from a
// small uniform alphabet, so both few and many distinct symbols occur.
Pattern random_pattern(std::size_t n, Rng& rng) {
  switch (rng.below(3)) {
    case 0: return sample_crp_partition(CrpParams{0.2 + 20.0 * rng.uniform()}, n, rng);
    case 1: {
      const double alpha = 0.05 + 0.9 * rng.uniform();
      return sample_crp_partition(PyParams{alpha, -alpha + 0.01 + 5.0 * rng.uniform()}, n, rng);
    }
    default: {
      const auto k = static_cast<std::uint32_t>(1 + rng.below(40));
      return sample_pattern(Source{DiscreteDistribution::uniform(k)}, n, rng);
    }
  }
}

// --- 1 ---------------------------------------------------------------------

CheckResult check_normalization(std::uint64_t) {
  std::vector<Estimator> estimators;
  for (double theta : {0.1, 1.0, 5.0}) estimators.emplace_back(CrpParams{theta});
  for (double alpha : {0.1, 0.5, 0.9}) {
    for (double theta : {-alpha / 2, 0.0, 1.0, 5.0}) estimators.emplace_back(PyParams{alpha, theta});
  }
  const MixtureConfig mixture{10, 10};
  estimators.emplace_back(mixture);
  const double mixture_mass = std::exp(mixture_log_mass(mixture));

  double worst = 0.0;
  std::size_t patterns = 0;
  for (std::size_t n = 1; n <= 10; ++n) {
    std::vector<KahanSum> sums(estimators.size());
    std::map<Counts, std::vector<double>> memo;
    for_each_pattern(n, [&](std::span<const Symbol> symbols) {
      ++patterns;
      std::vector<std::uint32_t> mult;
      for (Symbol s : symbols) {
        if (s > mult.size()) mult.push_back(0);
        ++mult[s - 1];
      }
      const PrevalenceProfile prof = profile_from_multiplicities(mult);
      auto [it, inserted] = memo.try_emplace(prof.counts);
      if (inserted) {
        for (const auto& e : estimators) it->second.push_back(log_prob(e, prof));
      }
      for (std::size_t k = 0; k < estimators.size(); ++k) sums[k].add(std::exp(it->second[k]));
    });
    for (std::size_t k = 0; k < estimators.size(); ++k) {
      const double target = k + 1 == estimators.size() ? mixture_mass : 1.0;
      worst = std::max(worst, std::fabs(sums[k].value() - target));
    }
  }
  Detail d;
  d << "max |sum - target| = " << worst << " over " << patterns << " patterns x "
    << estimators.size() << " estimators (tol 1e-8)";
  return make_result(worst <= 1e-8, d);
}

// --- 2 ---------------------------------------------------------------------

CheckResult check_sequential(std::uint64_t seed) {
  constexpr std::size_t kTrials = 10000;
  std::vector<double> deltas(kTrials);
  parallel_for(kTrials, [&](std::size_t t) {
    Rng rng(seed, 0x5E0000 + t);
    const std::size_t n = 1 + rng.below(500);
    const Pattern p = random_pattern(n, rng);
    SequentialParams params;
    if (rng.below(2) == 0) {
      params = CrpParams{std::exp(-3.0 + 8.0 * rng.uniform())};
    } else {
      const double alpha = 0.01 + 0.98 * rng.uniform();
      params = PyParams{alpha, -alpha + 1e-3 + 20.0 * rng.uniform() * rng.uniform()};
    }
    const double closed = std::visit(
        [&](const auto& q) { return log_prob(Estimator{q}, p); }, params);
    deltas[t] = std::fabs(sequential_log_prob(params, p) - closed);
  });
  const double worst = *std::max_element(deltas.begin(), deltas.end());
  Detail d;
  d << "max |sequential - closed| = " << worst << " nats over " << kTrials
    << " patterns, n <= 500 (tol 1e-9)";
  return make_result(worst <= 1e-9, d);
}

// --- 3 ---------------------------------------------------------------------

double sequential_any(const Estimator& e, const Pattern& p) {
  if (const auto* c = std::get_if<MixtureConfig>(&e)) return sequential_mixture_log_prob(*c, p);
  if (const auto* c = std::get_if<CrpParams>(&e)) return sequential_log_prob(*c, p);
  return sequential_log_prob(std::get<PyParams>(e), p);
}

CheckResult check_exchangeability(std::uint64_t seed) {
  constexpr std::size_t kProfiles = 1000;
  constexpr std::size_t kArrangements = 12;
  std::vector<double> spread(kProfiles);
  parallel_for(kProfiles, [&](std::size_t t) {
    Rng rng(seed, 0xEC0000 + t);
    const std::size_t n = 1 + rng.below(50);
    const std::vector<std::uint32_t> mult = multiplicities(random_pattern(n, rng));
    const std::vector<Estimator> estimators = {
        CrpParams{0.1 + 10.0 * rng.uniform()},
        PyParams{0.3, -0.2 + 3.0 * rng.uniform()},
        MixtureConfig{6, 6},
    };
    std::vector<std::uint64_t> tokens;
    for (std::size_t s = 0; s < mult.size(); ++s) tokens.insert(tokens.end(), mult[s], s);
    std::vector<double> lo(estimators.size() * 2, INFINITY), hi(estimators.size() * 2, -INFINITY);
    for (std::size_t a = 0; a < kArrangements; ++a) {
      std::shuffle(tokens.begin(), tokens.end(), rng);
      const Pattern p = extract_pattern(tokens);
      for (std::size_t k = 0; k < estimators.size(); ++k) {
        const double closed = log_prob(estimators[k], p);
        const double seq = sequential_any(estimators[k], p);
        lo[2 * k] = std::min(lo[2 * k], closed);
        hi[2 * k] = std::max(hi[2 * k], closed);
        lo[2 * k + 1] = std::min(lo[2 * k + 1], seq);
        hi[2 * k + 1] = std::max(hi[2 * k + 1], seq);
      }
    }
    double s = 0.0;
    for (std::size_t k = 0; k < lo.size(); ++k) s = std::max(s, hi[k] - lo[k]);
    spread[t] = s;
  });
  const double worst = *std::max_element(spread.begin(), spread.end());
  Detail d;
  d << "max log-prob spread within a profile = " << worst << " over " << kProfiles
    << " profiles x " << kArrangements << " arrangements (tol 1e-12)";
  return make_result(worst <= 1e-12, d);
}

// --- 4 ---------------------------------------------------------------------

CheckResult check_envelope(std::uint64_t seed) {
  constexpr std::size_t kDistributions = 100;
  std::vector<double> excess(kDistributions, kNegInf);
  std::vector<std::size_t> evaluated(kDistributions, 0);
  parallel_for(kDistributions, [&](std::size_t t) {
    Rng rng(seed, 0xE40000 + t);
    const std::size_t k = 1 + rng.below(12);
    std::vector<double> w(k);
    for (double& x : w) {
      // A mix of tied and spread-out atoms.
      x = rng.below(3) == 0 ? 1.0 : -std::log1p(-rng.uniform());
    }
    const auto dist = DiscreteDistribution::from_weights(std::move(w));
    for (std::size_t n = 1; n <= 7; ++n) {
      std::map<Counts, double> memo;
      for_each_pattern(n, [&](std::span<const Symbol> symbols) {
        std::vector<std::uint32_t> mult;
        for (Symbol s : symbols) {
          if (s > mult.size()) mult.push_back(0);
          ++mult[s - 1];
        }
        const PrevalenceProfile prof = profile_from_multiplicities(mult);
        auto [it, inserted] = memo.try_emplace(prof.counts, 0.0);
        if (inserted) {
          const double lp = pattern_log_prob_exact(dist, prof);
          it->second = lp - envelope_log_bound(prof).log_bound;
        }
        ++evaluated[t];
        excess[t] = std::max(excess[t], it->second);
      });
    }
  });
  const double worst = *std::max_element(excess.begin(), excess.end());
  const std::size_t total = std::accumulate(evaluated.begin(), evaluated.end(), std::size_t{0});
  Detail d;
  d << "max ln(p / envelope) = " << worst << " over " << total
    << " (distribution, pattern) pairs, n <= 7";
  return make_result(worst <= 1e-12, d);
}

// --- 5, 6 ------------------------------------------------------------------

struct BoundSample {
  std::uint64_t n;
  PrevalenceProfile profile;
};

std::vector<BoundSample> bound_samples(std::uint64_t seed) {
  const std::vector<std::string> sources = {"crp:1",         "crp:10",         "crp:100",
                                            "py:0.5:1",      "zipf:1.2:100",   "zipf:1.2:10000",
                                            "zipf:2:10000"};
  constexpr std::size_t kTrials = 30;
  const std::vector<std::uint64_t> lengths = {1u << 10, 1u << 14, 1u << 18};
  std::vector<BoundSample> out(sources.size() * lengths.size() * kTrials);
  std::vector<Source> parsed;
  for (const auto& s : sources) parsed.push_back(parse_source(s, seed));
  parallel_for(out.size(), [&](std::size_t idx) {
    const std::size_t src = idx / (lengths.size() * kTrials);
    const std::uint64_t n = lengths[(idx / kTrials) % lengths.size()];
    const Pattern p = sample_pattern(parsed[src], n, seed, 0xB00000 + idx);
    out[idx] = {n, profile(p)};
  });
  return out;
}

CheckResult check_bound(std::uint64_t seed, bool py) {
  const auto samples = bound_samples(seed);
  std::size_t checked = 0, filtered = 0;
  double worst = -INFINITY;
  for (const auto& s : samples) {
    if (s.profile.m > crp_distinct_limit(s.n)) {
      ++filtered;
      continue;
    }
    const double theta = select_crp_theta(s.n, s.profile.m).theta;
    for (double alpha : py ? std::vector<double>{0.25, 0.5, 0.75} : std::vector<double>{0.0}) {
      const Estimator e = py ? Estimator{PyParams{alpha, theta}} : Estimator{CrpParams{theta}};
      const RedundancyReport r = pattern_redundancy(e, s.profile);
      const double bound = py ? py_bound_upper(s.n, s.profile.m, alpha, theta)
                              : crp_bound_partialred(s.n, s.profile.m, theta);
      worst = std::max(worst, r.redundancy_nats - bound);
      ++checked;
    }
  }
  Detail d;
  d << "max (redundancy - bound) = " << worst << " nats over " << checked
    << " checks (" << filtered << " patterns above the distinct-count limit; slack 1 nat)";
  return make_result(checked > 0 && worst <= 1.0, d);
}

// --- 7 ---------------------------------------------------------------------

CheckResult check_linear(std::uint64_t) {
  bool ok = true;
  double worst_margin = INFINITY, worst_r2 = 1.0, min_slope = INFINITY;
  for (double alpha : {0.1, 0.5, 0.9}) {
    std::vector<double> xs, ys;
    for (int e = 7; e <= 14; ++e) {
      const std::uint64_t n = std::uint64_t{1} << e;
      const double sum = py_linear_witnesses(alpha, 1.0, n).sum();
      const double floor = (n - 1.0) * std::log(1.0 / claim_constant(alpha));
      worst_margin = std::min(worst_margin, sum - floor);
      if (sum < floor) ok = false;
      xs.push_back(static_cast<double>(n));
      ys.push_back(sum);
    }
    const double k = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / k;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
      syy += (ys[i] - my) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    const double r2 = sxy * sxy / (sxx * syy);
    min_slope = std::min(min_slope, slope);
    worst_r2 = std::min(worst_r2, r2);
    if (!(slope > 0.0 && r2 > 0.999)) ok = false;
  }
  Detail d;
  d << "min (sum - (n-1) ln(1/c)) = " << worst_margin << ", min slope = " << min_slope
    << ", min R^2 = " << worst_r2;
  return make_result(ok, d);
}

// --- 8 ---------------------------------------------------------------------

CheckResult check_claim(std::uint64_t) {
  std::uint64_t points = 0, violations = 0;
  double worst = -INFINITY;
  for (int a = 1; a <= 99; ++a) {
    const double alpha = a / 100.0;
    const double c = claim_constant(alpha);
    const int steps = static_cast<int>(std::lround((10.0 + alpha) * 100.0));
    for (int t = 1; t <= steps; ++t) {
      const double theta = -alpha + t / 100.0;
      for (std::uint64_t j = 1; j <= 1000; ++j) {
        ++points;
        const double lhs = claim_lhs(j, alpha, theta);
        worst = std::max(worst, lhs - c);
        if (!(lhs <= c + 1e-12)) ++violations;
      }
    }
  }
  // Spot-check the library entry point, including its domain guard.
  bool guard_ok = claim_inequality_check(1, 0.3, 0.2);
  try {
    claim_inequality_check(1, 0.5, -0.5);
    guard_ok = false;
  } catch (const DomainError&) {
  }
  Detail d;
  d << violations << " violations over " << points << " grid points; max (lhs - c) = " << worst;
  return make_result(violations == 0 && guard_ok, d);
}

// --- 9 ---------------------------------------------------------------------

CheckResult check_hrate(std::uint64_t seed) {
  const std::vector<std::pair<std::string, DiscreteDistribution>> sources = {
      {"geometric(1/2)", DiscreteDistribution::geometric(0.5)},
      {"zipf(1.5, 1e4)", DiscreteDistribution::zipf(1.5, 10000)},
      {"uniform(100)", DiscreteDistribution::uniform(100)},
  };
  constexpr std::size_t kTrials = 1000;
  bool ok = true;
  double worst = -INFINITY;
  Detail d;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const auto& dist = sources[s].second;
    for (std::uint64_t n : {1000u, 10000u}) {
      std::vector<double> m(kTrials);
      parallel_for(kTrials, [&](std::size_t t) {
        Rng rng(seed, (0x9A0000 + s * 16 + (n == 1000 ? 0 : 1)) * kTrials + t);
        std::vector<bool> seen(dist.support_size() + 1, false);
        std::uint32_t distinct = 0;
        for (std::uint64_t i = 0; i < n; ++i) {
          const std::uint32_t x = dist.sample(rng);
          if (!seen[x]) {
            seen[x] = true;
            ++distinct;
          }
        }
        m[t] = distinct;
      });
      const double mean = std::accumulate(m.begin(), m.end(), 0.0) / kTrials;
      double ss = 0.0;
      for (double v : m) ss += (v - mean) * (v - mean);
      const double sigma = std::sqrt(ss / (kTrials - 1));
      const double bound = expected_distinct_bound(dist.entropy(), n);
      worst = std::max(worst, (mean + 3 * sigma) / bound);
      if (!(mean + 3 * sigma <= bound)) ok = false;
    }
  }
  d << "max (mean + 3 sigma) / bound = " << worst << " over 3 sources x 2 lengths x "
    << kTrials << " trials";
  return make_result(ok, d);
}

// --- 10 --------------------------------------------------------------------

CheckResult check_growth(std::uint64_t seed) {
  constexpr std::size_t kTrials = 200;
  constexpr std::size_t n = 10000;
  std::vector<double> ratio(kTrials);
  parallel_for(kTrials, [&](std::size_t t) {
    Rng rng(seed, 0x670000 + t);
    ratio[t] = sample_crp_partition(CrpParams{2.0}, n, rng).distinct() / std::log(double(n));
  });
  const double mean = std::accumulate(ratio.begin(), ratio.end(), 0.0) / kTrials;
  Detail d;
  d << "mean M_n / ln n = " << mean << " (band [1.6, 2.4])";
  return make_result(mean >= 1.6 && mean <= 2.4, d);
}

// --- 11 --------------------------------------------------------------------

CheckResult check_weak_universality(std::uint64_t seed) {
  const auto dist = DiscreteDistribution::geometric(0.5);
  constexpr std::uint64_t kTrials = 100;
  std::vector<double> values;
  bool ok = true;
  Detail d;
  d << "per-symbol divergence:";
  for (int e : {6, 8, 10, 12}) {
    const std::uint64_t n = std::uint64_t{1} << e;
    const auto r = average_redundancy_mc(dist, default_mixture_config(n), n, kTrials,
                                         derive_seed(seed, 0x770000 + e), PatternProbMode::Exact);
    if (!values.empty() && !(r.per_symbol < values.back())) ok = false;
    values.push_back(r.per_symbol);
    d << " n=" << n << ": " << r.per_symbol << " (se " << r.std_error << ")";
  }
  return make_result(ok, d);
}

// --- 12 --------------------------------------------------------------------

CheckResult check_codec(std::uint64_t seed) {
  constexpr std::size_t kTrials = 10000;
  constexpr double kEpsilon = 0x1.0p-20;
  struct Outcome {
    bool round_trip = false;
    double low_margin = 0.0;   // bits - (-log2 q - 1)
    double high_margin = 0.0;  // (-log2 q + 32 + n eps) - bits
    double mixture_delta = 0.0;
  };
  std::vector<Outcome> out(kTrials);
  parallel_for(kTrials, [&](std::size_t t) {
    Rng rng(seed, 0xC00000 + t);
    const std::size_t n = rng.below(257);
    const Pattern p = random_pattern(n, rng);
    Estimator e;
    switch (t % 3) {
      case 0: e = CrpParams{std::exp(-2.0 + 6.0 * rng.uniform())}; break;
      case 1: {
        const double alpha = 0.01 + 0.98 * rng.uniform();
        e = PyParams{alpha, -alpha + 0.01 + 10.0 * rng.uniform()};
        break;
      }
      default:
        e = MixtureConfig{static_cast<std::uint32_t>(1 + rng.below(8)),
                          static_cast<std::uint32_t>(2 + rng.below(7))};
    }
    Outcome& o = out[t];
    const auto bytes = serialize(encode(e, p));
    const CodedPattern coded = parse(bytes);
    o.round_trip = decode(coded) == p;
    double ln_q = log_prob(e, p);
    if (const auto* c = std::get_if<MixtureConfig>(&e)) {
      ln_q -= mixture_log_mass(*c);
      o.mixture_delta = std::fabs(coding_cost(e, p).model_nats - ln_q);
    }
    const double ideal = -nats_to_bits(ln_q);
    const double bits = static_cast<double>(coded.payload_bits());
    o.low_margin = bits - (ideal - 1.0);
    o.high_margin = ideal + 32.0 + n * kEpsilon - bits;
  });
  std::size_t failures = 0;
  double low = INFINITY, high = INFINITY, mix = 0.0;
  for (const auto& o : out) {
    if (!o.round_trip) ++failures;
    low = std::min(low, o.low_margin);
    high = std::min(high, o.high_margin);
    mix = std::max(mix, o.mixture_delta);
  }
  Detail d;
  d << failures << " round-trip failures / " << kTrials << "; min margin below window = " << low
    << " bits, above = " << high << " bits; max |mixture joint - closed| = " << mix << " nats";
  return make_result(failures == 0 && low >= 0.0 && high >= 0.0 && mix <= 1e-6, d);
}

// --- 13 --------------------------------------------------------------------

CheckResult check_bell(std::uint64_t) {
  const auto bell = bell_numbers(12);
  bool ok = true;
  Detail d;
  for (std::size_t n = 0; n <= 12; ++n) {
    std::uint64_t count = 0;
    for_each_pattern(n, [&](std::span<const Symbol>) { ++count; });
    if (n <= 9 && enumerate_patterns(n).size() != count) ok = false;
    if (count != bell[n]) ok = false;
    if (n == 12) d << "B_12 = " << count << " (triangle " << bell[n] << ")";
  }
  return make_result(ok, d);
}

struct SuiteImpl {
  SuiteEntry entry;
  std::function<CheckResult(std::uint64_t)> run;
};

const std::vector<SuiteImpl>& suite_impls() {
  static const std::vector<SuiteImpl> impls = {
      {{"normalization", "probabilities over all patterns sum to 1 (n <= 10)"}, check_normalization},
      {{"sequential", "sequential and closed forms agree"}, check_sequential},
      {{"exchangeability", "log-prob depends only on the profile"}, check_exchangeability},
      {{"envelope", "exact pattern probability below the envelope"}, check_envelope},
      {{"crp-bound", "CRP redundancy within its bound"}, [](std::uint64_t s) { return check_bound(s, false); }},
      {{"py-upper", "PY redundancy within its bound"}, [](std::uint64_t s) { return check_bound(s, true); }},
      {{"linear", "PY witness patterns cost linear length"}, check_linear},
      {{"claim", "per-term ratio bound on the full grid"}, check_claim},
      {{"hrate", "distinct-count entropy bound"}, check_hrate},
      {{"growth", "CRP distinct count grows like theta ln n"}, check_growth},
      {{"weak-universality", "mixture divergence per symbol decreases"}, check_weak_universality},
      {{"codec", "range coder round trips and code lengths"}, check_codec},
      {{"bell", "pattern enumeration matches Bell numbers"}, check_bell},
  };
  return impls;
}

}  // namespace

const std::vector<SuiteEntry>& verify_suites() {
  static const std::vector<SuiteEntry> entries = [] {
    std::vector<SuiteEntry> out;
    for (const auto& impl : suite_impls()) out.push_back(impl.entry);
    return out;
  }();
  return entries;
}

CheckResult run_check(std::string_view name, std::uint64_t seed) {
  for (const auto& impl : suite_impls()) {
    if (impl.entry.name != name) continue;
    const auto start = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = impl.run(seed);
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.name = std::string(name);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  }
  throw DomainError("unknown verify suite '" + std::string(name) + "'");
}

std::vector<CheckResult> run_all_checks(std::uint64_t seed) {
  std::vector<CheckResult> out;
  for (const auto& entry : verify_suites()) out.push_back(run_check(entry.name, seed));
  return out;
}

std::vector<std::uint64_t> bell_numbers(std::size_t n) {
  std::vector<std::uint64_t> bell{1};
  std::vector<std::uint64_t> row{1};
  for (std::size_t i = 1; i <= n; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (std::uint64_t v : row) next.push_back(next.back() + v);
    bell.push_back(next.front());
    row = std::move(next);
  }
  return bell;
}

}  // namespace patternpress
