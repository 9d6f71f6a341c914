// SPDX-License-Identifier: Apache-2.0
#include "patternpress/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>

#include "patternpress/error.hpp"
#include "patternpress/numerics.hpp"
#include "patternpress/parallel.hpp"
#include "patternpress/rng.hpp"

namespace patternpress {
namespace {

struct AtomGroup {
  double log_mass;
  std::uint64_t count;
};

struct SymbolClass {
  std::uint32_t mu;
  std::uint32_t phi;
};

std::vector<SymbolClass> classes_of(const PrevalenceProfile& profile) {
  std::vector<SymbolClass> classes;
  for (auto [mu, phi] : profile.counts) classes.push_back({mu, phi});
  return classes;
}

std::vector<AtomGroup> group_atoms(const std::vector<double>& probs) {
  std::vector<double> sorted;
  for (double p : probs) {
    if (p > 0.0) sorted.push_back(p);
  }
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::vector<AtomGroup> groups;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    groups.push_back({std::log(sorted[i]), j - i});
    i = j;
  }
  return groups;
}

double state_count(const std::vector<SymbolClass>& classes) {
  double s = 1.0;
  for (const auto& c : classes) s *= c.phi + 1.0;
  return s;
}

double dp_work(const std::vector<AtomGroup>& groups,
               const std::vector<SymbolClass>& classes) {
  const double states = state_count(classes);
  double pairs = 1.0;
  for (const auto& c : classes) pairs *= (c.phi + 1.0) * (c.phi + 2.0) / 2.0;
  double work = 0.0;
  for (const auto& g : groups)
    work += g.count == 1 ? states * (classes.size() + 1.0) : pairs;
  return work;
}

// ln of the sum over injective maps, by dynamic programming over groups.
double group_dp(const std::vector<AtomGroup>& groups,
                const std::vector<SymbolClass>& classes) {
  const std::size_t C = classes.size();
  std::vector<std::size_t> stride(C);
  std::size_t states = 1;
  std::uint32_t max_phi = 0;
  for (std::size_t c = 0; c < C; ++c) {
    stride[c] = states;
    states *= classes[c].phi + 1;
    max_phi = std::max(max_phi, classes[c].phi);
  }
  // log_choose[r * (max_phi+1) + t] = ln C(r, t)
  const std::size_t w = max_phi + 1;
  std::vector<double> log_choose(w * w, kNegInf);
  for (std::uint32_t r = 0; r <= max_phi; ++r) {
    for (std::uint32_t t = 0; t <= r; ++t) {
      log_choose[r * w + t] =
          log_factorial(r) - log_factorial(t) - log_factorial(r - t);
    }
  }

  std::vector<double> cur(states, kNegInf), nxt;
  cur[states - 1] = 0.0;  // every symbol unassigned
  std::vector<std::uint32_t> r(C), t(C);

  for (const auto& g : groups) {
    nxt = cur;  // the atoms of this group stay unused
    for (std::size_t idx = 0; idx < states; ++idx) {
      // decode idx into remaining counts
      std::size_t rest = idx;
      for (std::size_t c = 0; c < C; ++c) {
        r[c] = static_cast<std::uint32_t>(rest % (classes[c].phi + 1));
        rest /= classes[c].phi + 1;
      }
      const double base = cur[idx];
      if (base == kNegInf) continue;

      if (g.count == 1) {
        for (std::size_t c = 0; c < C; ++c) {
          if (r[c] == 0) continue;
          const double v = base + std::log(static_cast<double>(r[c])) +
                           classes[c].mu * g.log_mass;
          double& slot = nxt[idx - stride[c]];
          slot = log_add(slot, v);
        }
        continue;
      }

      // Enumerate t <= r (t != 0) assigning sum(t) <= count symbols to
      // distinct atoms of the group.
      std::fill(t.begin(), t.end(), 0);
      for (;;) {
        std::size_t c = 0;
        while (c < C && t[c] == r[c]) {
          t[c] = 0;
          ++c;
        }
        if (c == C) break;
        ++t[c];
        std::uint64_t total = 0;
        double v = base;
        std::size_t target = idx;
        for (std::size_t k = 0; k < C; ++k) {
          if (t[k] == 0) continue;
          total += t[k];
          v += log_choose[r[k] * w + t[k]] + double(t[k]) * classes[k].mu * g.log_mass;
          target -= t[k] * stride[k];
        }
        if (total > g.count) continue;
        const double n_atoms = static_cast<double>(g.count);
        v += log_gamma(n_atoms + 1.0) - log_gamma(n_atoms - total + 1.0);
        nxt[target] = log_add(nxt[target], v);
      }
    }
    std::swap(cur, nxt);
  }
  return cur[0];
}

std::size_t positive_atoms(const std::vector<double>& probs) {
  return static_cast<std::size_t>(
      std::count_if(probs.begin(), probs.end(), [](double p) { return p > 0.0; }));
}

}  // namespace

double exact_work(const DiscreteDistribution& dist, const PrevalenceProfile& profile) {
  return dp_work(group_atoms(dist.probs()), classes_of(profile));
}

double pattern_log_prob_exact(const DiscreteDistribution& dist,
                              const PrevalenceProfile& profile) {
  if (profile.n == 0) return 0.0;
  if (profile.m > positive_atoms(dist.probs())) return kNegInf;
  const auto groups = group_atoms(dist.probs());
  const auto classes = classes_of(profile);
  const double work = dp_work(groups, classes);
  if (work > kExactWorkLimit) {
    throw TooLarge("pattern_prob_exact: estimated work " + std::to_string(work) +
                   " exceeds the limit " + std::to_string(kExactWorkLimit));
  }
  return group_dp(groups, classes);
}

double pattern_log_prob_exact(const DiscreteDistribution& dist, const Pattern& pattern) {
  return pattern_log_prob_exact(dist, profile(pattern));
}

double pattern_prob_exact(const DiscreteDistribution& dist, const Pattern& pattern) {
  return std::exp(pattern_log_prob_exact(dist, pattern));
}

EnvelopeBound envelope_log_bound(const PrevalenceProfile& profile) {
  double lb = -log_factorial(static_cast<double>(profile.n));
  for (auto [mu, phi] : profile.counts)
    lb += phi * log_factorial(mu) + log_factorial(phi);
  return {std::min(lb, 0.0)};
}

namespace {

// ln p(psi) when the first k coordinates of x are atoms and the last one is
// the mass spread over kDiffuseAtoms equal atoms.
class MaxProbObjective {
 public:
  explicit MaxProbObjective(const PrevalenceProfile& profile)
      : classes_(classes_of(profile)) {}

  double operator()(std::span<const double> x) const {
    std::vector<AtomGroup> groups;
    groups.reserve(x.size());
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      if (x[i] > 0.0) groups.push_back({std::log(x[i]), 1});
    }
    if (x.back() > 0.0)
      groups.push_back({std::log(x.back() / kDiffuseAtoms), kDiffuseAtoms});
    if (groups.empty()) return kNegInf;
    return group_dp(groups, classes_);
  }

 private:
  std::vector<SymbolClass> classes_;
};

// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0, tau = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cumsum += u[i];
    const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) tau = t;
  }
  for (double& x : v) x = std::max(0.0, x - tau);
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= s;
  return v;
}

struct Candidate {
  std::vector<double> x;
  double value = kNegInf;
};

Candidate ascend(const MaxProbObjective& f, std::vector<double> x) {
  constexpr double h = 1e-7;
  constexpr int kMaxIter = 200;
  double fx = f(x);
  if (fx == kNegInf) return {std::move(x), fx};
  double step = 0.05;
  std::vector<double> grad(x.size());
  for (int it = 0; it < kMaxIter; ++it) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      std::vector<double> hi = x;
      hi[i] += h;
      const double f_hi = f(hi);
      if (x[i] >= h) {
        std::vector<double> lo = x;
        lo[i] -= h;
        grad[i] = (f_hi - f(lo)) / (2 * h);
      } else {
        grad[i] = (f_hi - fx) / h;
      }
      if (!std::isfinite(grad[i])) grad[i] = 0.0;
    }
    bool improved = false;
    while (step > 1e-12) {
      std::vector<double> y(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + step * grad[i];
      y = project_to_simplex(std::move(y));
      const double fy = f(y);
      if (fy > fx) {
        improved = fy - fx > 1e-14;
        x = std::move(y);
        fx = fy;
        step = std::min(step * 2.0, 1.0);
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return {std::move(x), fx};
}

void grid_search(const MaxProbObjective& f, std::size_t dims, std::uint32_t resolution,
                 Candidate& best) {
  std::vector<std::uint32_t> parts(dims, 0);
  // Enumerate compositions of `resolution` into `dims` non-negative parts.
  const auto visit = [&](auto&& self, std::size_t d, std::uint32_t left) -> void {
    if (d + 1 == dims) {
      parts[d] = left;
      std::vector<double> x(dims);
      for (std::size_t i = 0; i < dims; ++i) x[i] = double(parts[i]) / resolution;
      const double v = f(x);
      if (v > best.value) best = {std::move(x), v};
      return;
    }
    for (std::uint32_t k = 0; k <= left; ++k) {
      parts[d] = k;
      self(self, d + 1, left - k);
    }
  };
  visit(visit, 0, resolution);
}

std::uint32_t grid_resolution(std::uint32_t atoms) {
  switch (atoms) {
    case 1: return 2000;
    case 2: return 200;
    default: return 48;
  }
}

}  // namespace

MaxProbResult max_pattern_prob(const Pattern& pattern, std::uint32_t support_budget,
                               std::uint64_t seed) {
  if (pattern.size() > kMaxProbLength) {
    throw TooLarge("max_pattern_prob: n = " + std::to_string(pattern.size()) +
                   " exceeds the guard " + std::to_string(kMaxProbLength));
  }
  if (support_budget > kMaxProbBudget) {
    throw TooLarge("max_pattern_prob: support budget exceeds " +
                   std::to_string(kMaxProbBudget));
  }
  if (support_budget < pattern.distinct()) {
    throw DomainError("max_pattern_prob: support budget must be >= m");
  }
  MaxProbResult result;
  if (pattern.empty()) {
    result.probability = 1.0;
    result.atoms.assign(support_budget, 0.0);
    if (support_budget > 0) result.atoms[0] = 1.0;
    else result.diffuse = 1.0;
    return result;
  }

  const MaxProbObjective f(profile(pattern));
  constexpr std::size_t kRandomStarts = 8;
  Candidate best;
  const std::uint32_t first = std::max<std::uint32_t>(pattern.distinct(), 1);

  for (std::uint32_t k = first; k <= support_budget; ++k) {
    const std::size_t dims = k + 1;
    std::vector<std::vector<double>> starts;
    if (!best.x.empty()) {
      std::vector<double> padded = best.x;
      padded.insert(padded.end() - 1, 0.0);
      starts.push_back(std::move(padded));
    }
    std::vector<double> even(dims, 0.0);
    for (std::size_t i = 0; i < k; ++i) even[i] = 1.0 / k;
    starts.push_back(even);
    std::vector<double> diffuse(dims, 0.0);
    diffuse.back() = 1.0;
    starts.push_back(diffuse);
    Rng rng(seed, k);
    for (std::size_t s = 0; s < kRandomStarts; ++s) {
      std::vector<double> x(dims);
      for (double& v : x) v = -std::log1p(-rng.uniform());
      const double total = std::accumulate(x.begin(), x.end(), 0.0);
      for (double& v : x) v /= total;
      starts.push_back(std::move(x));
    }

    Candidate stage;
    if (k <= 3) {
      grid_search(f, dims, grid_resolution(k), stage);
      starts.push_back(stage.x);
    }

    std::vector<Candidate> found(starts.size());
    parallel_for(starts.size(), [&](std::size_t s) { found[s] = ascend(f, starts[s]); });
    for (auto& c : found) {
      if (c.value > stage.value) stage = std::move(c);
    }
    if (!best.x.empty() && best.value >= stage.value) {
      best.x.insert(best.x.end() - 1, 0.0);
    } else {
      best = std::move(stage);
    }
  }

  result.probability = std::min(1.0, std::exp(best.value));
  result.atoms.assign(best.x.begin(), best.x.end() - 1);
  result.atoms.resize(support_budget, 0.0);
  result.diffuse = best.x.back();
  return result;
}

}  // namespace patternpress
