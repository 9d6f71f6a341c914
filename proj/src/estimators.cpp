// SPDX-License-Identifier: Apache-2.0
#include "patternpress/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "patternpress/error.hpp"
#include "patternpress/numerics.hpp"
#include "patternpress/parallel.hpp"

namespace patternpress {
namespace {

// sum_{i=0}^{count-1} ln(x + i) for x > 0. The log-gamma difference loses
// absolute precision once x dominates count, so that case is summed directly.
double log_rising(double x, std::uint64_t count) {
  if (count == 0) return 0.0;
  if (x > static_cast<double>(count) && count <= 1'000'000) {
    double s = 0.0;
    for (std::uint64_t i = 0; i < count; ++i) s += std::log(x + static_cast<double>(i));
    return s;
  }
  return log_gamma(x + static_cast<double>(count)) - log_gamma(x);
}

// sum_{i=1}^{m-1} ln(theta + i alpha) for alpha > 0 and theta > -alpha.
double log_discount_product(double alpha, double theta, std::uint32_t m) {
  if (m <= 1) return 0.0;
  // theta + i alpha = alpha (theta/alpha + i)
  return static_cast<double>(m - 1) * std::log(alpha) +
         log_rising(theta / alpha + 1.0, m - 1);
}

constexpr std::size_t kMaxSequentialComponents = std::size_t{1} << 22;

}  // namespace

void validate(const CrpParams& p) {
  if (!(p.theta > 0.0) || !std::isfinite(p.theta)) {
    throw DomainError("CRP: theta must be finite and > 0 (got " +
                      std::to_string(p.theta) + ")");
  }
}

void validate(const PyParams& p) {
  if (!(p.alpha >= 0.0 && p.alpha < 1.0)) {
    throw DomainError("Pitman-Yor: alpha must lie in [0, 1) (got " +
                      std::to_string(p.alpha) + ")");
  }
  if (!std::isfinite(p.theta) || !(p.theta + p.alpha > 0.0)) {
    throw DomainError("Pitman-Yor: theta must be finite and > -alpha (got " +
                      std::to_string(p.theta) + ")");
  }
}

void validate(const MixtureConfig& c) {
  if (c.i_max < 1) throw DomainError("mixture: i_max must be >= 1");
  if (c.j_max < 2) throw DomainError("mixture: j_max must be >= 2");
}

void validate(const Estimator& e) {
  std::visit([](const auto& p) { validate(p); }, e);
}

double crp_log_prob(const CrpParams& params, const PrevalenceProfile& profile) {
  validate(params);
  if (profile.n == 0) return 0.0;
  double lp = profile.m * std::log(params.theta) - log_rising(params.theta, profile.n);
  for (auto [mu, phi] : profile.counts) lp += phi * log_factorial(mu - 1.0);
  return lp;
}

double py_log_prob(const PyParams& params, const PrevalenceProfile& profile) {
  validate(params);
  // alpha = 0 is the Ewens formula; share its code path exactly.
  if (params.alpha == 0.0) return crp_log_prob(CrpParams{params.theta}, profile);
  if (profile.n == 0) return 0.0;
  // The leading theta of numerator and denominator cancels, which keeps
  // theta = 0 well defined.
  double lp = log_discount_product(params.alpha, params.theta, profile.m) -
              log_rising(params.theta + 1.0, profile.n - 1);
  const double base = 1.0 - params.alpha;
  for (auto [mu, phi] : profile.counts) lp += phi * log_rising(base, mu - 1);
  return lp;
}

StepLaw crp_step(const CrpParams& params, std::uint64_t n) {
  if (n == 0) return {};
  const double denom = static_cast<double>(n) + params.theta;
  return {1.0 / denom, 0.0, params.theta / denom};
}

StepLaw py_step(const PyParams& params, std::uint64_t n, std::uint32_t m) {
  if (n == 0) return {};
  const double denom = static_cast<double>(n) + params.theta;
  return {1.0 / denom, params.alpha / denom,
          (params.theta + m * params.alpha) / denom};
}

PredictiveDistribution crp_predictive(const CrpParams& params,
                                      std::span<const std::uint32_t> mult) {
  validate(params);
  PredictiveDistribution d;
  std::uint64_t n = 0;
  for (auto mu : mult) n += mu;
  if (n == 0) return d;
  const double denom = static_cast<double>(n) + params.theta;
  d.seen.reserve(mult.size());
  for (auto mu : mult) d.seen.push_back(mu / denom);
  d.new_symbol = params.theta / denom;
  return d;
}

PredictiveDistribution py_predictive(const PyParams& params,
                                     std::span<const std::uint32_t> mult) {
  validate(params);
  PredictiveDistribution d;
  std::uint64_t n = 0;
  for (auto mu : mult) n += mu;
  if (n == 0) return d;
  const double denom = static_cast<double>(n) + params.theta;
  d.seen.reserve(mult.size());
  for (auto mu : mult) d.seen.push_back((mu - params.alpha) / denom);
  d.new_symbol = (params.theta + static_cast<double>(mult.size()) * params.alpha) / denom;
  return d;
}

double sequential_log_prob(const SequentialParams& params, const Pattern& pattern) {
  const bool is_crp = std::holds_alternative<CrpParams>(params);
  const double alpha = is_crp ? 0.0 : std::get<PyParams>(params).alpha;
  const double theta = is_crp ? std::get<CrpParams>(params).theta
                              : std::get<PyParams>(params).theta;
  std::visit([](const auto& p) { validate(p); }, params);

  std::vector<std::uint32_t> counts;
  counts.reserve(pattern.distinct());
  double lp = 0.0;
  for (std::size_t n = 0; n < pattern.size(); ++n) {
    const Symbol s = pattern[n];
    if (n == 0) {
      counts.push_back(1);
      continue;
    }
    const double denom = static_cast<double>(n) + theta;
    if (s > counts.size()) {
      lp += std::log((theta + static_cast<double>(counts.size()) * alpha) / denom);
      counts.push_back(1);
    } else {
      lp += std::log((counts[s - 1] - alpha) / denom);
      ++counts[s - 1];
    }
  }
  return lp;
}

double mixture_weight(std::uint32_t i, std::uint32_t j) {
  const double di = i, dj = j;
  return 1.0 / (di * (di + 1.0) * dj * (dj + 1.0));
}

double mixture_log_weight(std::uint32_t i, std::uint32_t j) {
  const double di = i, dj = j;
  return -(std::log(di) + std::log(di + 1.0) + std::log(dj) + std::log(dj + 1.0));
}

double mixture_log_mass(const MixtureConfig& config) {
  validate(config);
  // sum_{i<=I} 1/(i(i+1)) = I/(I+1);  sum_{2<=j<=J} 1/(j(j+1)) = (J-1)/(2(J+1))
  const double I = config.i_max, J = config.j_max;
  return std::log(I / (I + 1.0)) + std::log((J - 1.0) / (2.0 * (J + 1.0)));
}

MixtureConfig default_mixture_config(std::uint64_t n) {
  const auto clamp = [](std::uint64_t v, std::uint32_t lo) {
    return static_cast<std::uint32_t>(
        std::clamp<std::uint64_t>(v, lo, UINT32_MAX));
  };
  return {clamp(n, 1), clamp(n, 2)};
}

std::vector<double> mixture_log_evidence(const MixtureConfig& config, std::uint64_t n,
                                         std::span<const std::uint32_t> ms) {
  validate(config);
  const std::size_t rows = config.i_max;
  const std::uint32_t j_max = config.j_max;
  const double dn = static_cast<double>(n);

  std::vector<double> log_j(j_max + 1, 0.0), log_cj(j_max + 1, 0.0);
  for (std::uint32_t j = 2; j <= j_max; ++j) {
    log_j[j] = std::log(static_cast<double>(j));
    log_cj[j] = -(log_j[j] + std::log(j + 1.0));
  }

  // One accumulator per (row, m); rows are merged in index order so the
  // result does not depend on the thread count.
  std::vector<LogSumExp> acc(rows * ms.size());
  parallel_for(rows, [&](std::size_t row) {
    const std::uint32_t i = static_cast<std::uint32_t>(row + 1);
    const double log_ci = -(std::log(static_cast<double>(i)) + std::log(i + 1.0));
    LogSumExp* out = acc.data() + row * ms.size();
    for (std::uint32_t j = 2; j <= j_max; ++j) {
      const double theta = i / log_j[j];
      const double log_theta = std::log(theta);
      const double base = log_ci + log_cj[j] -
                          (n == 0 ? 0.0 : log_gamma(theta + dn) - log_gamma(theta));
      for (std::size_t k = 0; k < ms.size(); ++k) out[k].add(base + ms[k] * log_theta);
    }
  });

  std::vector<double> result(ms.size());
  for (std::size_t k = 0; k < ms.size(); ++k) {
    LogSumExp total;
    for (std::size_t row = 0; row < rows; ++row) total.merge(acc[row * ms.size() + k]);
    result[k] = total.value();
  }
  return result;
}

double mixture_log_prob(const MixtureConfig& config, const PrevalenceProfile& profile) {
  const std::uint32_t m = profile.m;
  double lp = mixture_log_evidence(config, profile.n, std::span(&m, 1))[0];
  for (auto [mu, phi] : profile.counts) lp += phi * log_factorial(mu - 1.0);
  return lp;
}

double mixture_log_prob(const MixtureConfig& config, const Pattern& pattern) {
  return mixture_log_prob(config, profile(pattern));
}

double sequential_mixture_log_prob(const MixtureConfig& config, const Pattern& pattern) {
  SequentialPredictor predictor{Estimator{config}};
  std::vector<std::uint32_t> counts;
  double lp = 0.0;
  for (Symbol s : pattern.symbols()) {
    const StepLaw law = predictor.law();
    if (s > counts.size()) {
      lp += std::log(law.new_symbol);
      counts.push_back(1);
      predictor.observe(0);
    } else {
      lp += std::log(law.seen(counts[s - 1]));
      predictor.observe(counts[s - 1]++);
    }
  }
  return lp + mixture_log_mass(config);
}

CrpParams select_crp_theta(std::uint64_t n, std::uint32_t m) {
  if (n < 2) throw DomainError("select_crp_theta: n must be >= 2");
  if (m > n) throw DomainError("select_crp_theta: m must not exceed n");
  return {std::max(m / std::log(static_cast<double>(n)), kMinTheta)};
}

double log_prob(const Estimator& estimator, const PrevalenceProfile& profile) {
  struct Visitor {
    const PrevalenceProfile& profile;
    double operator()(const CrpParams& p) const { return crp_log_prob(p, profile); }
    double operator()(const PyParams& p) const { return py_log_prob(p, profile); }
    double operator()(const MixtureConfig& c) const { return mixture_log_prob(c, profile); }
  };
  return std::visit(Visitor{profile}, estimator);
}

double log_prob(const Estimator& estimator, const Pattern& pattern) {
  return log_prob(estimator, profile(pattern));
}

SequentialPredictor::SequentialPredictor(const Estimator& estimator)
    : estimator_(estimator) {
  validate(estimator_);
  if (const auto* config = std::get_if<MixtureConfig>(&estimator_)) {
    const std::size_t components =
        std::size_t{config->i_max} * (config->j_max - 1);
    if (components > kMaxSequentialComponents) {
      throw TooLarge("sequential mixture: " + std::to_string(components) +
                     " components exceed the limit of " +
                     std::to_string(kMaxSequentialComponents));
    }
    thetas_.reserve(components);
    log_thetas_.reserve(components);
    log_weights_.reserve(components);
    for (std::uint32_t i = 1; i <= config->i_max; ++i) {
      for (std::uint32_t j = 2; j <= config->j_max; ++j) {
        const double theta = i / std::log(static_cast<double>(j));
        thetas_.push_back(theta);
        log_thetas_.push_back(std::log(theta));
        log_weights_.push_back(mixture_log_weight(i, j));
      }
    }
  }
}

StepLaw SequentialPredictor::law() const {
  if (n_ == 0) return {};
  if (const auto* p = std::get_if<CrpParams>(&estimator_)) return crp_step(*p, n_);
  if (const auto* p = std::get_if<PyParams>(&estimator_)) return py_step(*p, n_, m_);
  return cached_;
}

void SequentialPredictor::observe(std::uint32_t mu_before) {
  const bool is_new = mu_before == 0;
  if (!thetas_.empty()) {
    // Component k realized theta_k/(n+theta_k) or mu/(n+theta_k); the factor
    // mu is shared by every component and cancels on normalization.
    const double dn = static_cast<double>(n_);
    for (std::size_t k = 0; k < thetas_.size(); ++k) {
      log_weights_[k] += (is_new ? log_thetas_[k] : 0.0) - std::log(dn + thetas_[k]);
    }
  }
  ++n_;
  if (is_new) ++m_;
  if (!thetas_.empty()) refresh_mixture_law();
}

void SequentialPredictor::refresh_mixture_law() {
  const double top = *std::max_element(log_weights_.begin(), log_weights_.end());
  const double dn = static_cast<double>(n_);
  double z = 0.0, a = 0.0, b = 0.0;
  for (std::size_t k = 0; k < thetas_.size(); ++k) {
    const double w = std::exp(log_weights_[k] - top);
    const double inv = 1.0 / (dn + thetas_[k]);
    z += w;
    a += w * thetas_[k] * inv;
    b += w * inv;
  }
  cached_ = StepLaw{b / z, 0.0, a / z};
}

}  // namespace patternpress
