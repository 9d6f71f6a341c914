// SPDX-License-Identifier: Apache-2.0
#include "patternpress/samplers.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "patternpress/error.hpp"
#include "patternpress/numerics.hpp"

namespace patternpress {
namespace {

double checked_sum(const std::vector<double>& xs) {
  KahanSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(std::string_view spec, std::string_view field) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || end != field.data() + field.size()) {
    throw DomainError("source '" + std::string(spec) + "': cannot parse number '" +
                      std::string(field) + "'");
  }
  return v;
}

std::uint32_t parse_count(std::string_view spec, std::string_view field) {
  std::uint32_t v = 0;
  auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || end != field.data() + field.size() || v == 0) {
    throw DomainError("source '" + std::string(spec) +
                      "': expected a positive integer, got '" + std::string(field) + "'");
  }
  return v;
}

DiscreteDistribution from_sticks(const StickBreakingWeights& sticks) {
  std::vector<double> probs = sticks.weights;
  probs.push_back(sticks.residual);
  return DiscreteDistribution::from_weights(std::move(probs));
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) throw DomainError("distribution: empty support");
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw DomainError("distribution: probabilities must be finite and >= 0");
  }
  const double total = checked_sum(probs_);
  if (std::fabs(total - 1.0) > 1e-12) {
    throw DomainError("distribution: probabilities sum to " +
                      std::to_string(total) + ", not 1");
  }
  cumulative_.resize(probs_.size());
  KahanSum running;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    running.add(probs_[i]);
    cumulative_[i] = running.value();
  }
}

DiscreteDistribution DiscreteDistribution::point_mass() {
  return DiscreteDistribution({1.0});
}

DiscreteDistribution DiscreteDistribution::uniform(std::uint32_t k) {
  if (k == 0) throw DomainError("uniform: k must be >= 1");
  return from_weights(std::vector<double>(k, 1.0));
}

DiscreteDistribution DiscreteDistribution::zipf(double s, std::uint32_t k) {
  if (k == 0) throw DomainError("zipf: k must be >= 1");
  if (!std::isfinite(s)) throw DomainError("zipf: exponent must be finite");
  std::vector<double> w(k);
  for (std::uint32_t i = 0; i < k; ++i) w[i] = std::pow(i + 1.0, -s);
  return from_weights(std::move(w));
}

DiscreteDistribution DiscreteDistribution::geometric(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("geometric: q must lie in (0, 1]");
  std::vector<double> probs;
  double tail = 1.0;  // (1 - q)^(i-1) before atom i
  constexpr double kCut = 0x1.0p-60;
  for (;;) {
    const double p = q * tail;
    tail *= 1.0 - q;
    if (tail < kCut) {
      probs.push_back(p + tail);
      break;
    }
    probs.push_back(p);
  }
  return from_weights(std::move(probs));
}

DiscreteDistribution DiscreteDistribution::from_weights(std::vector<double> weights) {
  if (weights.empty()) throw DomainError("distribution: empty support");
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw DomainError("distribution: weights must be finite and >= 0");
  }
  const double total = checked_sum(weights);
  if (!(total > 0.0)) throw DomainError("distribution: weights sum to zero");
  for (double& w : weights) w /= total;
  return DiscreteDistribution(std::move(weights));
}

double DiscreteDistribution::entropy() const {
  KahanSum h;
  for (double p : probs_) {
    if (p > 0.0) h.add(-p * std::log(p));
  }
  return h.value();
}

std::uint32_t DiscreteDistribution::sample(Rng& rng) const {
  const double x = rng.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
  std::size_t idx = static_cast<std::size_t>(it - cumulative_.begin());
  if (idx >= probs_.size()) {
    // x landed on the rounding slack at the top; take the last positive atom.
    idx = probs_.size() - 1;
    while (idx > 0 && probs_[idx] == 0.0) --idx;
  }
  return static_cast<std::uint32_t>(idx + 1);
}

std::vector<std::uint64_t> sample_iid(const DiscreteDistribution& dist, std::size_t n,
                                      std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint64_t> out(n);
  for (auto& x : out) x = dist.sample(rng);
  return out;
}

namespace {

StickBreakingWeights break_stick(std::size_t T, Rng& rng, double a,
                                 double b0, double b_step) {
  StickBreakingWeights sticks;
  sticks.weights.reserve(T);
  double remaining = 1.0;
  for (std::size_t i = 1; i <= T; ++i) {
    const double w = rng.beta(a, b0 + b_step * static_cast<double>(i));
    const double piece = w * remaining;
    sticks.weights.push_back(piece);
    remaining = std::max(0.0, remaining - piece);
  }
  sticks.residual = remaining;
  return sticks;
}

}  // namespace

StickBreakingWeights gem_weights(double theta, std::size_t T, std::uint64_t seed) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw DomainError("gem_weights: theta must be > 0");
  if (T == 0) throw DomainError("gem_weights: T must be >= 1");
  Rng rng(seed);
  return break_stick(T, rng, 1.0, theta, 0.0);
}

StickBreakingWeights py_weights(double alpha, double theta, std::size_t T,
                                std::uint64_t seed) {
  validate(PyParams{alpha, theta});
  if (T == 0) throw DomainError("py_weights: T must be >= 1");
  Rng rng(seed);
  return break_stick(T, rng, 1.0 - alpha, theta, alpha);
}

Pattern sample_crp_partition(const SequentialParams& params, std::size_t n, Rng& rng) {
  std::visit([](const auto& p) { validate(p); }, params);
  const bool is_crp = std::holds_alternative<CrpParams>(params);
  const double alpha = is_crp ? 0.0 : std::get<PyParams>(params).alpha;
  const double theta = is_crp ? std::get<CrpParams>(params).theta
                              : std::get<PyParams>(params).theta;

  PatternBuilder builder(n);
  // seat[c] is the symbol of customer c; picking a uniform customer selects
  // an existing symbol with probability proportional to its multiplicity.
  std::vector<Symbol> seat;
  seat.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double m = builder.distinct();
    const bool is_new =
        t == 0 || rng.uniform() * (static_cast<double>(t) + theta) < theta + m * alpha;
    if (is_new) {
      seat.push_back(builder.push_new());
      continue;
    }
    Symbol s;
    for (;;) {
      s = seat[rng.below(t)];
      // Thin mu-proportional proposals down to (mu - alpha).
      if (alpha == 0.0 || rng.uniform() * builder.counts()[s - 1] >= alpha) break;
    }
    builder.push_seen(s);
    seat.push_back(s);
  }
  return std::move(builder).build();
}

Pattern sample_crp_partition(const SequentialParams& params, std::size_t n,
                             std::uint64_t seed) {
  Rng rng(seed);
  return sample_crp_partition(params, n, rng);
}

Source parse_source(std::string_view spec, std::uint64_t seed) {
  const auto parts = split(spec, ':');
  const std::string_view kind = parts[0];
  const auto expect = [&](std::size_t fields) {
    if (parts.size() != fields + 1) {
      throw DomainError("source '" + std::string(spec) + "': expected " +
                        std::to_string(fields) + " parameter(s)");
    }
  };
  if (kind == "uniform") {
    expect(1);
    return DiscreteDistribution::uniform(parse_count(spec, parts[1]));
  }
  if (kind == "zipf") {
    expect(2);
    return DiscreteDistribution::zipf(parse_double(spec, parts[1]),
                                      parse_count(spec, parts[2]));
  }
  if (kind == "geometric") {
    expect(1);
    return DiscreteDistribution::geometric(parse_double(spec, parts[1]));
  }
  if (kind == "dirichlet-stick") {
    expect(2);
    return from_sticks(gem_weights(parse_double(spec, parts[1]),
                                   parse_count(spec, parts[2]), seed));
  }
  if (kind == "py-stick") {
    expect(3);
    return from_sticks(py_weights(parse_double(spec, parts[1]),
                                  parse_double(spec, parts[2]),
                                  parse_count(spec, parts[3]), seed));
  }
  if (kind == "crp") {
    expect(1);
    CrpParams p{parse_double(spec, parts[1])};
    validate(p);
    return p;
  }
  if (kind == "py") {
    expect(2);
    PyParams p{parse_double(spec, parts[1]), parse_double(spec, parts[2])};
    validate(p);
    return p;
  }
  throw DomainError("unknown source '" + std::string(spec) + "'");
}

Pattern sample_pattern(const Source& source, std::size_t n, Rng& rng) {
  if (const auto* dist = std::get_if<DiscreteDistribution>(&source)) {
    std::vector<std::uint64_t> tokens(n);
    for (auto& x : tokens) x = dist->sample(rng);
    return extract_pattern(tokens);
  }
  if (const auto* p = std::get_if<CrpParams>(&source))
    return sample_crp_partition(SequentialParams{*p}, n, rng);
  return sample_crp_partition(SequentialParams{std::get<PyParams>(source)}, n, rng);
}

Pattern sample_pattern(const Source& source, std::size_t n, std::uint64_t seed,
                       std::uint64_t stream) {
  Rng rng(seed, stream);
  return sample_pattern(source, n, rng);
}

}  // namespace patternpress
