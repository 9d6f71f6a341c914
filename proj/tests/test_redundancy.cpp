// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "patternpress/error.hpp"
#include "patternpress/oracle.hpp"
#include "patternpress/redundancy.hpp"

using namespace patternpress;

namespace {

Pattern pat(std::vector<Symbol> s) { return validate_pattern(std::move(s)); }

}  // namespace

TEST_CASE("per-pattern redundancy examples") {
  auto r = pattern_redundancy(CrpParams{1.0}, pat({1}));
  CHECK(r.redundancy_nats == doctest::Approx(0.0));
  r = pattern_redundancy(CrpParams{1.0}, pat({1, 1}));
  CHECK(r.ln_p_upper == doctest::Approx(0.0));
  CHECK(r.ln_q == doctest::Approx(std::log(0.5)));
  CHECK(r.redundancy_nats == doctest::Approx(std::log(2.0)));
  CHECK(r.per_symbol == doctest::Approx(std::log(2.0) / 2));
  CHECK_FALSE(r.bound_nats.has_value());
  r = pattern_redundancy(PyParams{0.5, 0.5}, pat({1, 2}));
  CHECK(r.ln_q == doctest::Approx(std::log(2.0 / 3)));
  CHECK(r.redundancy_nats == doctest::Approx(std::log(1.5)));
  CHECK(r.bound_nats.has_value());
  r = pattern_redundancy(MixtureConfig{3, 3}, Pattern{});
  CHECK(r.per_symbol == 0.0);
  CHECK(r.redundancy_nats == r.ln_p_upper - r.ln_q);
}

TEST_CASE("CRP bound terms") {
  const double n = 1e4, m = 10, ln = std::log(n);
  const double t1 = m * std::log(n / m);
  const double t2 = m * std::log(ln);
  const double t3 = (m / ln) * std::log(2 + n * ln / m);
  CHECK(crp_bound_partialred(10000, 10, m / ln) == doctest::Approx(t1 + t2 + t3).epsilon(1e-13));
  CHECK(t1 + t2 + t3 > 0);

  const double l16 = std::log(16.0);
  CHECK(crp_bound_partialred(16, 16, 16 / l16) ==
        doctest::Approx(16 * std::log(l16) + (16 / l16) * std::log(2 + l16)));
  CHECK_THROWS_AS(crp_bound_partialred(15, 3, 1.0), DomainError);
  CHECK_THROWS_AS(crp_bound_partialred(100, 0, 1.0), DomainError);
  CHECK_THROWS_AS(crp_bound_partialred(100, 101, 1.0), DomainError);
}

TEST_CASE("CRP bound scaling with m = n (ln ln n)^2 / ln n") {
  // Every grid point with 1 <= m <= n and n >= 16 satisfies the 3C bound.
  std::size_t checked = 0;
  for (int e = 120; e <= 800; ++e) {
    const double n = std::pow(10.0, e / 100.0);
    const auto ni = static_cast<std::uint64_t>(n);
    if (ni < 16) continue;
    const double m = crp_distinct_limit(ni);
    const auto mi = static_cast<std::uint64_t>(m);
    if (mi < 1 || mi > ni) continue;
    const double ln = std::log(double(ni)), lln = std::log(ln);
    const double theta = mi / ln;
    CHECK(crp_bound_partialred(ni, mi, theta) <= 3.0 * ni * lln * lln * lln / ln);
    ++checked;
  }
  CHECK(checked > 500);
}

TEST_CASE("PY bound") {
  const std::uint64_t n = 1000000, m = 1000;
  const double theta = m / std::log(double(n));
  CHECK(py_bound_upper(n, m, 0.5, theta) / n < 0.1);

  // With m = 2 the (m - 2) term drops out.
  const double a = 0.3, th = 1.4, tb = 2.0;
  const double expected = 4 * std::log(50.0) + tb * std::log((tb + 100) * std::exp(1.0) / tb) +
                          std::log(4 / (th + a)) + std::log(1 / ((1 - a) * (1 - a)));
  CHECK(py_bound_upper(100, 2, a, th) == doctest::Approx(expected));
  CHECK_THROWS_AS(py_bound_upper(100, 5, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(py_bound_upper(100, 5, 0.5, -0.5), DomainError);
}

TEST_CASE("bounds dominate measured redundancy on sampled patterns") {
  Rng rng(31);
  for (int t = 0; t < 1000; ++t) {
    const std::uint64_t n = 16 + rng.below(3000);
    const Pattern p = t % 2 ? sample_crp_partition(CrpParams{0.5 + 30 * rng.uniform()}, n, rng)
                            : sample_crp_partition(PyParams{0.5, 1.0}, n, rng);
    const double theta = select_crp_theta(n, p.distinct()).theta;
    const auto crp = pattern_redundancy(CrpParams{theta}, p);
    CHECK(crp.redundancy_nats <= crp_bound_partialred(n, p.distinct(), theta) + 1.0);
    const auto py = pattern_redundancy(PyParams{0.5, theta}, p);
    CHECK(py.redundancy_nats <= py_bound_upper(n, p.distinct(), 0.5, theta) + 1.0);
  }
}

TEST_CASE("linear witnesses") {
  const double alpha = 0.3, theta = 0.8;
  const auto w2 = py_linear_witnesses(alpha, theta, 2);
  CHECK(w2.all_same == doctest::Approx(-std::log((1 - alpha) / (1 + theta))));
  CHECK(w2.all_distinct == doctest::Approx(-std::log((theta + alpha) / (1 + theta))));
  for (double a : {0.1, 0.5, 0.9}) {
    for (double th : {-a / 2, 0.0, 1.0, 7.0}) {
      for (std::uint64_t n : {2u, 10u, 100u, 5000u}) {
        CHECK(py_linear_witnesses(a, th, n).sum() >=
              (n - 1.0) * std::log(1.0 / claim_constant(a)) - 1e-9);
      }
    }
  }
  CHECK_THROWS_AS(py_linear_witnesses(0.5, 1.0, 1), DomainError);
}

TEST_CASE("claim inequality") {
  CHECK(claim_lhs(1, 0.3, 0.2) == doctest::Approx(0.7 * 0.5 / 1.44));
  CHECK(claim_inequality_check(1, 0.3, 0.2));
  CHECK(claim_inequality_check(1000000, 0.9, 0.0));
  CHECK(claim_lhs(1000000, 0.9, 0.0) == doctest::Approx(0.9).epsilon(1e-5));
  CHECK_THROWS_AS(claim_inequality_check(0, 0.3, 0.2), DomainError);
  CHECK_THROWS_AS(claim_inequality_check(1, 0.0, 0.2), DomainError);
  CHECK_THROWS_AS(claim_inequality_check(1, 1.0, 0.2), DomainError);
  CHECK_THROWS_AS(claim_inequality_check(1, 0.4, -0.4), DomainError);
}

TEST_CASE("distinct-count bounds") {
  CHECK(expected_distinct_bound(0.0, 100) == 1.0);
  CHECK(expected_distinct_bound(std::log(100.0), 1000000) == doctest::Approx(333334.33).epsilon(1e-6));
  CHECK_THROWS_AS(expected_distinct_bound(-1.0, 10), DomainError);

  const auto g = DiscreteDistribution::geometric(0.5);
  constexpr int kTrials = 300;
  std::vector<double> m(kTrials);
  for (int t = 0; t < kTrials; ++t) m[t] = sample_pattern(Source{g}, 10000, 5, t).distinct();
  double mean = 0, ss = 0;
  for (double v : m) mean += v / kTrials;
  for (double v : m) ss += (v - mean) * (v - mean);
  CHECK(mean + 3 * std::sqrt(ss / (kTrials - 1)) <= expected_distinct_bound(g.entropy(), 10000));

  const double ln = std::log(1e6), lln = std::log(ln);
  CHECK(markov_distinct_tail(0.0, 1000000) == doctest::Approx(ln / (1e6 * lln * lln)));
  CHECK(markov_distinct_tail(1.0, 1000000) == doctest::Approx(0.146).epsilon(0.01));
  CHECK_THROWS_AS(markov_distinct_tail(1.0, 15), DomainError);

  const auto u = DiscreteDistribution::uniform(100);
  int tail = 0;
  for (int t = 0; t < 200; ++t) tail += sample_pattern(Source{u}, 10000, 6, t).distinct() > crp_distinct_limit(10000);
  CHECK(tail / 200.0 <= markov_distinct_tail(u.entropy(), 10000));
}

TEST_CASE("chebyshev sum inequality") {
  CHECK(chebyshev_sum_check({1, 0}, {1, 0}));
  CHECK(chebyshev_sum_check({3, 2, 1}, {6, 5, 4}));
  CHECK(chebyshev_sum_check({2, 2, 2}, {5, 5, 5}));
  CHECK_THROWS_AS(chebyshev_sum_check({1, 2}, {2, 1}), DomainError);
  CHECK_THROWS_AS(chebyshev_sum_check({1}, {2, 1}), DomainError);
  CHECK_THROWS_AS(chebyshev_sum_check({1, -1}, {2, 1}), DomainError);
  Rng rng(12);
  for (int t = 0; t < 100000; ++t) {
    const std::size_t n = 1 + rng.below(8);
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = rng.uniform();
    for (auto& v : y) v = 10 * rng.uniform();
    std::sort(x.rbegin(), x.rend());
    std::sort(y.rbegin(), y.rend());
    if (!chebyshev_sum_check(x, y)) FAIL("violation");
  }
}

TEST_CASE("average redundancy, point mass closed form") {
  for (double theta : {0.5, 2.0}) {
    for (std::uint64_t n : {10u, 100u, 1000u}) {
      double expected = 0.0;
      for (std::uint64_t i = 1; i < n; ++i) expected += std::log((i + theta) / i);
      expected /= n;
      const auto r = average_redundancy_mc(DiscreteDistribution::point_mass(), CrpParams{theta}, n,
                                           3, 1);
      CHECK(r.per_symbol == doctest::Approx(expected).epsilon(1e-12));
      CHECK(r.mode == "exact");
    }
  }
}

TEST_CASE("average redundancy modes and determinism") {
  const auto d = DiscreteDistribution::zipf(1.3, 30);
  const Estimator e = CrpParams{1.0};
  const auto a = average_redundancy_mc(d, e, 50, 1, 42);
  const auto b = average_redundancy_mc(d, e, 50, 1, 42);
  CHECK(a.per_symbol == b.per_symbol);
  const auto exact = average_redundancy_mc(d, e, 40, 20, 3, PatternProbMode::Exact);
  const auto lower = average_redundancy_mc(d, e, 40, 20, 3, PatternProbMode::SequenceLowerBound);
  const auto upper = average_redundancy_mc(d, e, 40, 20, 3, PatternProbMode::Envelope);
  CHECK(lower.per_symbol <= exact.per_symbol);
  CHECK(exact.per_symbol <= upper.per_symbol);
  CHECK(upper.mode == "envelope");
  CHECK(lower.mode == "sequence-lower-bound");
  CHECK(exact.exact_trials == 20);
  CHECK_THROWS_AS(average_redundancy_mc(d, e, 40, 0, 3), DomainError);

  const auto wide = DiscreteDistribution::zipf(1.05, 20000);
  const auto mixed = average_redundancy_mc(wide, e, 2000, 4, 3);
  CHECK(mixed.lower_bound_trials > 0);
}

TEST_CASE("lower-bound term never exceeds the exact probability") {
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> w(1 + rng.below(6));
    for (auto& x : w) x = rng.uniform();
    const auto d = DiscreteDistribution::from_weights(w);
    for (const Pattern& p : enumerate_patterns(5)) {
      CHECK(pattern_log_prob_lower(d, profile(p)) <= pattern_log_prob_exact(d, p) + 1e-12);
    }
  }
}

TEST_CASE("mixture divergence decreases on a two-symbol source") {
  const auto d = DiscreteDistribution::uniform(2);
  double previous = INFINITY;
  for (int e : {6, 8, 10}) {
    const std::uint64_t n = std::uint64_t{1} << e;
    const auto r = average_redundancy_mc(d, default_mixture_config(n), n, 30, 77);
    CHECK(r.mode == "exact");
    CHECK(r.per_symbol < previous);
    previous = r.per_symbol;
  }
}
