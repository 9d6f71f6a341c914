// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "patternpress/coder.hpp"
#include "patternpress/error.hpp"
#include "patternpress/samplers.hpp"

using namespace patternpress;

namespace {

double log2_q(const Estimator& e, const Pattern& p) {
  return coding_cost(e, p).model_nats / std::log(2.0);
}

std::vector<std::uint8_t> artifact(const Estimator& e, const Pattern& p) {
  return serialize(encode(e, p));
}

}  // namespace

TEST_CASE("empty and single-symbol patterns cost nothing") {
  for (const Estimator& e : {Estimator{CrpParams{1.0}}, Estimator{PyParams{0.5, 0.5}},
                             Estimator{MixtureConfig{4, 4}}}) {
    CHECK(encode(e, Pattern{}).payload_bits() == 0);
    CHECK(decode(encode(e, Pattern{})).empty());
    const Pattern one = validate_pattern({1});
    CHECK(encode(e, one).payload_bits() == 0);
    CHECK(decode(encode(e, one)) == one);
  }
}

TEST_CASE("code length of a constant pattern") {
  const Pattern p = validate_pattern(std::vector<Symbol>(1000, 1));
  const Estimator e = CrpParams{1.0};
  const double ideal = -log2_q(e, p);
  CHECK(ideal == doctest::Approx(std::log2(1000.0)).epsilon(1e-12));
  const auto coded = encode(e, p);
  CHECK(static_cast<double>(coded.payload_bits()) <= ideal + 32);
  CHECK(decode(coded) == p);
}

TEST_CASE("bits per symbol track the model at large n") {
  const PyParams params{0.5, 1.0};
  const Pattern p = sample_crp_partition(params, 200000, 5);
  const auto coded = encode(params, p);
  const double ideal = -log2_q(params, p);
  const double per_symbol = static_cast<double>(coded.payload_bits()) / p.size();
  CHECK(std::fabs(per_symbol - ideal / p.size()) <= 0.01);
  CHECK(coding_cost(params, p).model_nats == doctest::Approx(log_prob(Estimator{params}, p)));
  CHECK(decode(coded) == p);
}

TEST_CASE("round trips") {
  Rng rng(21);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = rng.below(400);
    const Pattern p = sample_crp_partition(CrpParams{0.3 + 20 * rng.uniform()}, n, rng);
    const Estimator e = t % 3 == 0   ? Estimator{CrpParams{0.1 + 10 * rng.uniform()}}
                        : t % 3 == 1 ? Estimator{PyParams{0.9 * rng.uniform(), 2 * rng.uniform()}}
                                     : Estimator{MixtureConfig{1 + std::uint32_t(rng.below(10)),
                                                               2 + std::uint32_t(rng.below(10))}};
    const auto bytes = artifact(e, p);
    CHECK(decode(parse(bytes)) == p);
    CHECK(bytes == artifact(e, p));
    const auto cost = coding_cost(e, p);
    CHECK(parse(bytes).payload.size() * 8.0 <= -cost.quantized_nats / std::log(2.0) + 16);
    CHECK(std::fabs(cost.quantized_nats - cost.model_nats) <= 1e-6 * (n + 1));
  }
}

TEST_CASE("mixture coding model is the normalized mixture") {
  const MixtureConfig c{6, 5};
  const Pattern p = validate_pattern({1, 2, 1, 1, 3, 2, 4, 1});
  CHECK(coding_cost(c, p).model_nats ==
        doctest::Approx(mixture_log_prob(c, p) - mixture_log_mass(c)).epsilon(1e-12));
}

TEST_CASE("malformed artifacts are rejected") {
  const Pattern p = validate_pattern({1, 2, 1, 3, 3, 1, 2, 4, 1, 1, 5, 2});
  const auto good = artifact(PyParams{0.4, 0.7}, p);
  REQUIRE(good.size() > 4 + 2 + 16 + 8 + 4);

  auto bytes = good;
  bytes[0] = 'X';
  CHECK_THROWS_AS(parse(bytes), CorruptStream);

  bytes = good;
  bytes[4] = 9;
  CHECK_THROWS_AS(parse(bytes), UnknownVersion);

  bytes = good;
  bytes[5] = 7;
  CHECK_THROWS_AS(parse(bytes), UnknownVersion);

  for (std::size_t cut = 0; cut < good.size(); ++cut) {
    const std::vector<std::uint8_t> truncated(good.begin(), good.begin() + cut);
    CHECK_THROWS_AS(decode(parse(truncated)), CorruptStream);
  }

  bytes = good;
  bytes.back() ^= 0x40;
  CHECK_THROWS_AS(parse(bytes), CorruptStream);

  bytes = good;
  bytes.push_back(0);
  CHECK_THROWS_AS(decode(parse(bytes)), CorruptStream);

  // Declaring more symbols than were coded either fails or yields a valid
  // pattern of the declared length extending the original.
  auto coded = encode(CrpParams{1.0}, p);
  coded.n += 50;
  try {
    const Pattern longer = decode(coded);
    REQUIRE(longer.size() == coded.n);
    CHECK(std::equal(p.symbols().begin(), p.symbols().end(), longer.symbols().begin()));
  } catch (const CorruptStream&) {
  }
}

TEST_CASE("frequency quantization") {
  Rng rng(2);
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> w(1 + rng.below(50));
    for (auto& x : w) x = rng.below(4) == 0 ? 1e-15 : rng.uniform();
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) x /= total;
    const auto f = quantize_frequencies(w);
    CHECK(std::accumulate(f.begin(), f.end(), std::uint64_t{0}) == kFrequencyTotal);
    CHECK(*std::min_element(f.begin(), f.end()) >= 1);
  }
  const std::vector<double> half = {0.5, 0.5};
  CHECK(quantize_frequencies(half) == std::vector<std::uint64_t>{kFrequencyTotal / 2, kFrequencyTotal / 2});
  const std::vector<double> skew = {1.0 - 1e-12, 1e-12};
  const auto f = quantize_frequencies(skew);
  CHECK(f[1] == 1);
  CHECK(f[0] == kFrequencyTotal - 1);
}
