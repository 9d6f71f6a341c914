// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "patternpress/error.hpp"
#include "patternpress/estimators.hpp"
#include "patternpress/samplers.hpp"

using namespace patternpress;

namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("distribution validation") {
  CHECK_THROWS_AS(DiscreteDistribution({0.5, 0.4}), DomainError);
  CHECK_THROWS_AS(DiscreteDistribution({1.5, -0.5}), DomainError);
  CHECK_THROWS_AS(DiscreteDistribution({}), DomainError);
  CHECK_THROWS_AS(DiscreteDistribution::from_weights({0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(DiscreteDistribution::uniform(0), DomainError);
  CHECK_THROWS_AS(DiscreteDistribution::geometric(0.0), DomainError);
  CHECK_NOTHROW(DiscreteDistribution({0.25, 0.25, 0.5}));
}

TEST_CASE("named distributions") {
  const auto u = DiscreteDistribution::uniform(8);
  CHECK(u.entropy() == doctest::Approx(std::log(8.0)));
  const auto z = DiscreteDistribution::zipf(2.0, 100);
  CHECK(z[0] / z[1] == doctest::Approx(4.0));
  CHECK(sum(z.probs()) == doctest::Approx(1.0));
  const auto g = DiscreteDistribution::geometric(0.5);
  CHECK(g[0] == doctest::Approx(0.5));
  CHECK(g[3] == doctest::Approx(1.0 / 16));
  CHECK(g.entropy() == doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));
  CHECK(sum(g.probs()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(DiscreteDistribution::point_mass().entropy() == 0.0);
}

TEST_CASE("i.i.d. sampling") {
  CHECK(sample_iid(DiscreteDistribution::point_mass(), 5, 1) ==
        std::vector<std::uint64_t>(5, 1));
  CHECK(sample_iid(DiscreteDistribution::uniform(3), 0, 1).empty());
  const auto draws = sample_iid(DiscreteDistribution::uniform(2), 100000, 4);
  const double ones = static_cast<double>(std::count(draws.begin(), draws.end(), 1));
  CHECK(ones / draws.size() >= 0.49);
  CHECK(ones / draws.size() <= 0.51);

  const DiscreteDistribution d({0.1, 0.0, 0.2, 0.7});
  std::map<std::uint64_t, double> freq;
  constexpr int kDraws = 200000;
  for (auto x : sample_iid(d, kDraws, 8)) freq[x] += 1;
  CHECK(freq.count(2) == 0);
  for (std::uint64_t label : {1u, 3u, 4u}) {
    const double p = d[label - 1];
    const double sigma = std::sqrt(p * (1 - p) / kDraws);
    CHECK(std::fabs(freq[label] / kDraws - p) < 6 * sigma);
  }
  CHECK(sample_iid(d, 50, 3) == sample_iid(d, 50, 3));
}

TEST_CASE("stick breaking") {
  const auto sticks = gem_weights(2.0, 50, 1);
  CHECK(sticks.weights.size() == 50);
  CHECK(sum(sticks.weights) + sticks.residual == doctest::Approx(1.0));
  CHECK(gem_weights(1e-4, 5, 2).weights[0] > 0.99);
  CHECK_THROWS_AS(gem_weights(0.0, 5, 1), DomainError);
  CHECK_THROWS_AS(py_weights(1.0, 1.0, 5, 1), DomainError);

  // E[W_1] = (1 - alpha) / (1 + theta); alpha = 0 reduces to GEM.
  constexpr int kDraws = 4000;
  for (auto [alpha, theta] : {std::pair{0.0, 2.0}, std::pair{0.5, 1.0}, std::pair{0.3, -0.2}}) {
    double mean = 0.0;
    for (int t = 0; t < kDraws; ++t) mean += py_weights(alpha, theta, 3, 100 + t).weights[0];
    mean /= kDraws;
    const double expected = (1 - alpha) / (1 + theta);
    CHECK(mean == doctest::Approx(expected).epsilon(0.05));
  }
}

TEST_CASE("partition sampler matches the exact pattern law") {
  for (const SequentialParams params : {SequentialParams{CrpParams{1.5}},
                                        SequentialParams{PyParams{0.6, 0.4}}}) {
    constexpr int kDraws = 200000;
    std::map<std::vector<Symbol>, double> freq;
    Rng rng(33);
    for (int t = 0; t < kDraws; ++t) {
      const Pattern p = sample_crp_partition(params, 4, rng);
      freq[{p.symbols().begin(), p.symbols().end()}] += 1;
    }
    for (const Pattern& p : enumerate_patterns(4)) {
      const double q = std::exp(std::visit(
          [&](const auto& x) { return log_prob(Estimator{x}, p); }, params));
      const double observed = freq[{p.symbols().begin(), p.symbols().end()}] / kDraws;
      CHECK(std::fabs(observed - q) < 6 * std::sqrt(q * (1 - q) / kDraws));
    }
  }
}

TEST_CASE("partition sampler growth") {
  CHECK(sample_crp_partition(CrpParams{1.0}, 1, 7) == validate_pattern({1}));
  CHECK(sample_crp_partition(CrpParams{1.0}, 0, 7).empty());
  constexpr int kTrials = 200;
  constexpr std::size_t n = 2000;
  double expected = 0.0;
  for (std::size_t i = 0; i < n; ++i) expected += 3.0 / (3.0 + i);
  double mean = 0.0;
  Rng rng(3);
  for (int t = 0; t < kTrials; ++t) mean += sample_crp_partition(CrpParams{3.0}, n, rng).distinct();
  mean /= kTrials;
  // Var(M_n) <= E[M_n].
  CHECK(std::fabs(mean - expected) < 5 * std::sqrt(expected / kTrials));

  double ratio = 0.0;
  for (int t = 0; t < 20; ++t) {
    ratio += std::log(double(sample_crp_partition(PyParams{0.6, 1.0}, 10000, rng).distinct())) /
             std::log(10000.0);
  }
  ratio /= 20;
  CHECK(ratio >= 0.5);
  CHECK(ratio <= 0.7);
}

TEST_CASE("source specifiers") {
  CHECK(std::get<DiscreteDistribution>(parse_source("uniform:4")).support_size() == 4);
  CHECK(std::get<DiscreteDistribution>(parse_source("zipf:1.5:10")).support_size() == 10);
  CHECK(std::holds_alternative<DiscreteDistribution>(parse_source("geometric:0.3")));
  CHECK(std::get<DiscreteDistribution>(parse_source("dirichlet-stick:2:20")).support_size() == 21);
  CHECK(std::get<DiscreteDistribution>(parse_source("py-stick:0.5:1:30")).support_size() == 31);
  CHECK(std::get<CrpParams>(parse_source("crp:2.5")).theta == 2.5);
  CHECK(std::get<PyParams>(parse_source("py:0.3:1")).alpha == 0.3);
  for (const char* bad : {"", "uniform", "uniform:0", "uniform:x", "zipf:1", "crp:-1",
                          "py:1:1", "normal:0:1", "geometric:2"}) {
    CHECK_THROWS_AS(parse_source(bad), DomainError);
  }
}

TEST_CASE("seeded streams") {
  const Source s = parse_source("zipf:1.1:50");
  CHECK(sample_pattern(s, 100, 5, 0) == sample_pattern(s, 100, 5, 0));
  CHECK_FALSE(sample_pattern(s, 100, 5, 0) == sample_pattern(s, 100, 5, 1));
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.below(7) < 7);
  }
}
