// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "patternpress/error.hpp"
#include "patternpress/estimators.hpp"
#include "patternpress/rng.hpp"
#include "patternpress/samplers.hpp"

using namespace patternpress;

namespace {

Pattern pat(std::vector<Symbol> s) { return validate_pattern(std::move(s)); }

// Chains the one-step laws written out longhand, in long double.
long double naive_sequential(double alpha, double theta, const Pattern& p) {
  std::vector<long double> counts;
  long double lp = 0.0L;
  for (std::size_t t = 0; t < p.size(); ++t) {
    const long double n = t, m = counts.size();
    const Symbol s = p[t];
    if (t == 0) {
      counts.push_back(1);
      continue;
    }
    if (s > counts.size()) {
      lp += std::log((theta + m * alpha) / (n + theta));
      counts.push_back(1);
    } else {
      lp += std::log((counts[s - 1] - alpha) / (n + theta));
      counts[s - 1] += 1;
    }
  }
  return lp;
}

// Ewens formula as a plain product: theta^m prod (mu-1)! / prod_{i<n} (theta+i).
long double naive_crp_prob(long double theta, const Pattern& p) {
  long double v = 1.0L;
  for (auto mu : multiplicities(p)) {
    v *= theta;
    for (std::uint32_t k = 2; k < mu; ++k) v *= k;
  }
  for (std::size_t i = 0; i < p.size(); ++i) v /= theta + i;
  return v;
}

long double naive_mixture_prob(std::uint32_t i_max, std::uint32_t j_max, const Pattern& p) {
  long double s = 0.0L;
  for (std::uint32_t i = 1; i <= i_max; ++i) {
    for (std::uint32_t j = 2; j <= j_max; ++j) {
      const long double c = 1.0L / (static_cast<long double>(i) * (i + 1) * j * (j + 1));
      s += c * naive_crp_prob(i / std::log(static_cast<long double>(j)), p);
    }
  }
  return s;
}

}  // namespace

TEST_CASE("CRP closed form on small patterns") {
  CHECK(crp_log_prob({1.0}, profile(pat({1}))) == doctest::Approx(0.0));
  CHECK(crp_log_prob({2.0}, profile(pat({1, 1}))) == doctest::Approx(std::log(1.0 / 3)));
  CHECK(crp_log_prob({2.0}, profile(pat({1, 2}))) == doctest::Approx(std::log(2.0 / 3)));
  CHECK(crp_log_prob({1.0}, profile(pat({1, 2, 1}))) == doctest::Approx(std::log(1.0 / 6)));
  CHECK(crp_log_prob({3.0}, profile(Pattern{})) == 0.0);
}

TEST_CASE("PY closed form on small patterns") {
  const PyParams p{0.5, 0.5};
  CHECK(py_log_prob(p, profile(pat({1, 1}))) == doctest::Approx(std::log(1.0 / 3)));
  CHECK(py_log_prob(p, profile(pat({1, 2}))) == doctest::Approx(std::log(2.0 / 3)));
  // theta = 0 is well defined once the leading theta cancels.
  CHECK(std::isfinite(py_log_prob({0.4, 0.0}, profile(pat({1, 2, 1, 3})))));
}

TEST_CASE("PY with alpha = 0 is the CRP") {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    const Pattern p = sample_crp_partition(CrpParams{3.0}, 1 + rng.below(60), rng);
    const double theta = 0.1 + 5 * rng.uniform();
    CHECK(py_log_prob({0.0, theta}, profile(p)) ==
          doctest::Approx(crp_log_prob({theta}, profile(p))).epsilon(1e-13));
  }
  CHECK(sequential_log_prob(PyParams{0.0, 1.0}, pat({1, 2, 1})) ==
        doctest::Approx(std::log(1.0 / 6)));
}

TEST_CASE("closed forms agree with a long-double sequential oracle") {
  Rng rng(5);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = rng.below(200);
    const double alpha = t % 2 ? 0.0 : 0.95 * rng.uniform();
    const double theta = -alpha + 0.01 + 10 * rng.uniform();
    const Pattern p = sample_crp_partition(PyParams{alpha > 0 ? alpha : 0.3, 2.0}, n, rng);
    const long double oracle = naive_sequential(alpha, theta, p);
    const double closed = alpha == 0.0 ? crp_log_prob({theta}, profile(p))
                                       : py_log_prob({alpha, theta}, profile(p));
    CHECK(std::fabs(closed - static_cast<double>(oracle)) < 1e-9);
    const SequentialParams sp = alpha == 0.0 ? SequentialParams{CrpParams{theta}}
                                             : SequentialParams{PyParams{alpha, theta}};
    CHECK(std::fabs(sequential_log_prob(sp, p) - static_cast<double>(oracle)) < 1e-9);
  }
}

TEST_CASE("large n stays finite and consistent") {
  const Pattern p = sample_crp_partition(CrpParams{50.0}, 200000, 3);
  const double closed = crp_log_prob({50.0}, profile(p));
  CHECK(std::isfinite(closed));
  CHECK(std::fabs(sequential_log_prob(CrpParams{50.0}, p) - closed) < 1e-6);
}

TEST_CASE("predictive distributions") {
  const std::vector<std::uint32_t> two_ones = {2};
  auto d = crp_predictive({1.0}, two_ones);
  CHECK(d.seen[0] == doctest::Approx(2.0 / 3));
  CHECK(d.new_symbol == doctest::Approx(1.0 / 3));
  CHECK(crp_predictive({1.0}, {}).new_symbol == 1.0);
  const std::vector<std::uint32_t> ones = {1, 1};
  d = crp_predictive({0.5}, ones);
  CHECK(d.seen[1] == doctest::Approx(1 / 2.5));
  CHECK(d.new_symbol == doctest::Approx(0.5 / 2.5));

  const std::vector<std::uint32_t> one = {1};
  d = py_predictive({0.5, 1.0}, one);
  CHECK(d.seen[0] == doctest::Approx(0.25));
  CHECK(d.new_symbol == doctest::Approx(0.75));
  d = py_predictive({0.9, -0.5}, one);
  CHECK(d.seen[0] == doctest::Approx(0.2));
  CHECK(d.new_symbol == doctest::Approx(0.8));
  d = py_predictive({0.0, 1.0}, two_ones);
  CHECK(d.seen[0] == doctest::Approx(2.0 / 3));
  CHECK(py_predictive({0.3, 0.2}, {}).new_symbol == 1.0);

  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    const auto mult = multiplicities(sample_crp_partition(CrpParams{4.0}, 1 + rng.below(100), rng));
    const auto q = py_predictive({0.7, -0.3 + rng.uniform()}, mult);
    double total = q.new_symbol;
    for (double v : q.seen) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(validate(CrpParams{0.0}), DomainError);
  CHECK_THROWS_AS(validate(CrpParams{-1.0}), DomainError);
  CHECK_THROWS_AS(validate(PyParams{1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(validate(PyParams{-0.1, 1.0}), DomainError);
  CHECK_THROWS_AS(validate(PyParams{0.5, -0.5}), DomainError);
  CHECK_NOTHROW(validate(PyParams{0.5, -0.49}));
  CHECK_THROWS_AS(validate(MixtureConfig{0, 5}), DomainError);
  CHECK_THROWS_AS(validate(MixtureConfig{3, 1}), DomainError);
}

TEST_CASE("mixture weights and mass") {
  CHECK(mixture_weight(1, 2) == doctest::Approx(1.0 / 12));
  CHECK(mixture_log_weight(3, 4) == doctest::Approx(std::log(1.0 / (3 * 4 * 4 * 5))));
  for (std::uint32_t I : {1u, 2u, 10u, 300u}) {
    for (std::uint32_t J : {2u, 3u, 17u, 500u}) {
      const double closed = std::log(I / (I + 1.0)) + std::log((J - 1.0) / (2.0 * (J + 1.0)));
      CHECK(mixture_log_mass({I, J}) == doctest::Approx(closed).epsilon(1e-12));
    }
  }
  CHECK(default_mixture_config(0).i_max == 1);
  CHECK(default_mixture_config(0).j_max == 2);
  CHECK(default_mixture_config(500).j_max == 500);
}

TEST_CASE("mixture closed form against direct summation") {
  CHECK(mixture_log_prob({1, 2}, pat({1})) == doctest::Approx(std::log(1.0 / 12)));
  CHECK(mixture_log_prob({7, 9}, Pattern{}) == doctest::Approx(mixture_log_mass({7, 9})));
  Rng rng(21);
  for (int t = 0; t < 40; ++t) {
    const Pattern p = sample_crp_partition(CrpParams{2.0}, 1 + rng.below(40), rng);
    const auto I = static_cast<std::uint32_t>(1 + rng.below(12));
    const auto J = static_cast<std::uint32_t>(2 + rng.below(12));
    CHECK(mixture_log_prob({I, J}, p) ==
          doctest::Approx(static_cast<double>(std::log(naive_mixture_prob(I, J, p)))).epsilon(1e-11));
  }
}

TEST_CASE("mixture of all-ones against its largest component") {
  std::vector<Symbol> ones(100, 1);
  const Pattern p = pat(ones);
  double best = -INFINITY;
  for (std::uint32_t i = 1; i <= 64; ++i) {
    for (std::uint32_t j = 2; j <= 64; ++j) {
      best = std::max(best, mixture_log_weight(i, j) +
                               crp_log_prob({i / std::log(double(j))}, profile(p)));
    }
  }
  const double lp = mixture_log_prob({64, 64}, p);
  CHECK(lp >= best);
  CHECK(lp - best <= std::log(64.0 * 63.0));
  // Direct summation over the 64 x 63 grid; many components of similar
  // weight put the sum about 2.79 nats above the largest term.
  CHECK(lp == doctest::Approx(-4.276914632457144).epsilon(1e-12));
}

TEST_CASE("batched evidence equals one-at-a-time evaluation") {
  const MixtureConfig c{20, 30};
  const std::vector<std::uint32_t> ms = {1, 4, 9, 40};
  const auto batch = mixture_log_evidence(c, 50, ms);
  for (std::size_t k = 0; k < ms.size(); ++k) {
    CHECK(batch[k] == doctest::Approx(mixture_log_evidence(c, 50, std::span(&ms[k], 1))[0]));
  }
}

TEST_CASE("sequential mixture matches the closed form") {
  Rng rng(2);
  for (int t = 0; t < 60; ++t) {
    const Pattern p = sample_crp_partition(PyParams{0.4, 1.0}, rng.below(150), rng);
    const MixtureConfig c{static_cast<std::uint32_t>(1 + rng.below(9)),
                          static_cast<std::uint32_t>(2 + rng.below(9))};
    CHECK(std::fabs(sequential_mixture_log_prob(c, p) - mixture_log_prob(c, p)) < 1e-9);
  }
  CHECK_THROWS_AS(SequentialPredictor(Estimator{MixtureConfig{5000, 5000}}), TooLarge);
}

TEST_CASE("theta selection") {
  CHECK(select_crp_theta(55, 8).theta == doctest::Approx(8 / std::log(55.0)));
  CHECK(select_crp_theta(55, 8).theta == doctest::Approx(1.996).epsilon(1e-3));
  CHECK(select_crp_theta(10, 1).theta == doctest::Approx(0.434).epsilon(1e-3));
  CHECK(select_crp_theta(10, 0).theta == kMinTheta);
  CHECK_THROWS_AS(select_crp_theta(1, 1), DomainError);
  CHECK_THROWS_AS(select_crp_theta(10, 11), DomainError);
}

TEST_CASE("exchangeability of the closed and sequential forms") {
  Rng rng(77);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::uint64_t> tokens;
    const auto mult = multiplicities(sample_crp_partition(CrpParams{3.0}, 1 + rng.below(30), rng));
    for (std::size_t s = 0; s < mult.size(); ++s) tokens.insert(tokens.end(), mult[s], s);
    std::shuffle(tokens.begin(), tokens.end(), rng);
    const Pattern a = extract_pattern(tokens);
    std::shuffle(tokens.begin(), tokens.end(), rng);
    const Pattern b = extract_pattern(tokens);
    CHECK(sequential_log_prob(PyParams{0.3, 0.7}, a) ==
          doctest::Approx(sequential_log_prob(PyParams{0.3, 0.7}, b)).epsilon(1e-13));
  }
}

TEST_CASE("log_prob dispatch") {
  const Pattern p = pat({1, 2, 1});
  CHECK(log_prob(Estimator{CrpParams{1.0}}, p) == doctest::Approx(std::log(1.0 / 6)));
  CHECK(log_prob(Estimator{PyParams{0.5, 0.5}}, p) == doctest::Approx(py_log_prob({0.5, 0.5}, profile(p))));
  CHECK(log_prob(Estimator{MixtureConfig{2, 3}}, p) == doctest::Approx(mixture_log_prob({2, 3}, p)));
}
