// SPDX-License-Identifier: Apache-2.0
//
// Range coding of patterns under the sequential predictive laws.
//
// Artifact layout (little-endian):
//   "PTNC" | version u8 | estimator id u8 | params f64[] | n u64 | crc32 u32 | payload
// with ids 1 = CRP [theta], 2 = PY [alpha, theta], 3 = mixture [i_max, j_max].
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "patternpress/estimators.hpp"
#include "patternpress/pattern.hpp"

namespace patternpress {

inline constexpr std::uint8_t kFormatVersion = 1;
inline constexpr int kFrequencyBits = 32;
inline constexpr std::uint64_t kFrequencyTotal = std::uint64_t{1} << kFrequencyBits;

struct CodedPattern {
  std::uint8_t version = kFormatVersion;
  Estimator estimator;
  std::uint64_t n = 0;
  std::vector<std::uint8_t> payload;

  std::uint64_t payload_bits() const noexcept { return payload.size() * 8; }
};

// Frequencies summing to kFrequencyTotal: each entry is round-half-even of
// p * 2^32 with a floor of 1, and the difference to the total is settled on
// the most probable entries.
std::vector<std::uint64_t> quantize_frequencies(std::span<const double> probs);

CodedPattern encode(const Estimator& estimator, const Pattern& pattern);
// Throws CorruptStream when the payload does not decode to n symbols.
Pattern decode(const CodedPattern& coded);

std::vector<std::uint8_t> serialize(const CodedPattern& coded);
// Throws CorruptStream (bad magic, truncation, checksum or parameters) or
// UnknownVersion (version or estimator id).
CodedPattern parse(std::span<const std::uint8_t> bytes);

struct CodingCost {
  // Natural-log probability the coder's model assigns to the pattern: the sum
  // of realized predictive log-probabilities before quantization. For the
  // mixture this is mixture_log_prob minus mixture_log_mass.
  double model_nats = 0.0;
  // Same sum over the quantized frequencies.
  double quantized_nats = 0.0;
};

CodingCost coding_cost(const Estimator& estimator, const Pattern& pattern);

}  // namespace patternpress
