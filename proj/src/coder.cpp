// SPDX-License-Identifier: Apache-2.0
#include "patternpress/coder.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "patternpress/error.hpp"

namespace patternpress {
namespace {

constexpr std::uint64_t kTop = std::uint64_t{1} << 56;
constexpr std::uint8_t kMagic[4] = {'P', 'T', 'N', 'C'};

class RangeEncoder {
 public:
  explicit RangeEncoder(std::vector<std::uint8_t>& out) : out_(out) {}

  void encode(std::uint64_t cum, std::uint64_t freq) {
    touched_ = true;
    const std::uint64_t r = range_ >> kFrequencyBits;
    const std::uint64_t before = low_;
    low_ += r * cum;
    if (low_ < before) carry();
    range_ = r * freq;
    while (range_ < kTop) {
      out_.push_back(static_cast<std::uint8_t>(low_ >> 56));
      low_ <<= 8;
      range_ <<= 8;
    }
  }

  // Emits the fewest bytes whose every continuation stays inside the final
  // interval, so the code is prefix-free.
  void finish() {
    if (!touched_) return;
    using u128 = unsigned __int128;
    const u128 lo = low_;
    const u128 hi = lo + range_;
    for (int k = 1; k <= 8; ++k) {
      const int shift = 64 - 8 * k;
      const u128 unit = u128{1} << shift;
      const u128 v = ((lo + unit - 1) >> shift) << shift;
      if (v + unit > hi) continue;
      if (v >> 64) carry();
      const auto w = static_cast<std::uint64_t>(v);
      for (int b = 0; b < k; ++b) out_.push_back(static_cast<std::uint8_t>(w >> (56 - 8 * b)));
      return;
    }
  }

 private:
  void carry() {
    for (auto it = out_.rbegin(); it != out_.rend(); ++it) {
      if (++*it != 0) return;
    }
  }

  std::vector<std::uint8_t>& out_;
  std::uint64_t low_ = 0;
  std::uint64_t range_ = ~std::uint64_t{0};
  bool touched_ = false;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint64_t target() {
    if (!started_) {
      for (int b = 0; b < 8; ++b) offset_ = (offset_ << 8) | next_byte();
      started_ = true;
    }
    r_ = range_ >> kFrequencyBits;
    const std::uint64_t t = offset_ / r_;
    if (t >= kFrequencyTotal) throw CorruptStream("decode: code value outside the range");
    return t;
  }

  void consume(std::uint64_t cum, std::uint64_t freq) {
    offset_ -= r_ * cum;
    range_ = r_ * freq;
    while (range_ < kTop) {
      offset_ = (offset_ << 8) | next_byte();
      range_ <<= 8;
    }
  }

  // Bytes the decoder has looked at, counting zero padding past the end.
  std::size_t consumed() const noexcept { return pos_; }

 private:
  std::uint64_t next_byte() { return pos_ < in_.size() ? in_[pos_++] : (++pos_, 0); }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  bool started_ = false;
  std::uint64_t offset_ = 0;  // code value minus the interval's low end
  std::uint64_t range_ = ~std::uint64_t{0};
  std::uint64_t r_ = 0;
};

std::vector<double> step_probs(const StepLaw& law, const std::vector<std::uint32_t>& counts) {
  std::vector<double> probs(counts.size() + 1);
  for (std::size_t s = 0; s < counts.size(); ++s) probs[s] = law.seen(counts[s]);
  probs.back() = law.new_symbol;
  return probs;
}

// Calls fn(probs, index) for every coded step of the pattern; the first
// symbol is always new and is not coded.
template <class Fn>
void for_each_step(const Estimator& estimator, const Pattern& pattern, Fn&& fn) {
  SequentialPredictor predictor(estimator);
  std::vector<std::uint32_t> counts;
  for (Symbol s : pattern.symbols()) {
    const bool is_new = s > counts.size();
    if (!counts.empty()) {
      fn(step_probs(predictor.law(), counts), is_new ? counts.size() : s - 1);
    }
    if (is_new) {
      counts.push_back(1);
      predictor.observe(0);
    } else {
      predictor.observe(counts[s - 1]++);
    }
  }
}

std::uint8_t estimator_id(const Estimator& e) { return static_cast<std::uint8_t>(e.index() + 1); }

std::vector<double> estimator_params(const Estimator& e) {
  if (const auto* p = std::get_if<CrpParams>(&e)) return {p->theta};
  if (const auto* p = std::get_if<PyParams>(&e)) return {p->alpha, p->theta};
  const auto& c = std::get<MixtureConfig>(e);
  return {static_cast<double>(c.i_max), static_cast<double>(c.j_max)};
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes = 8) {
  for (int b = 0; b < bytes; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t at, int bytes = 8) {
  std::uint64_t v = 0;
  for (int b = bytes - 1; b >= 0; --b) v = (v << 8) | in[at + b];
  return v;
}

std::uint32_t payload_crc(std::span<const std::uint8_t> payload) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large payloads in pieces.
  std::size_t at = 0;
  while (at < payload.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(payload.size() - at, 1u << 30));
    crc = crc32(crc, payload.data() + at, chunk);
    at += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<std::uint64_t> quantize_frequencies(std::span<const double> probs) {
  if (probs.empty()) throw DomainError("quantize_frequencies: empty alphabet");
  if (probs.size() > kFrequencyTotal)
    throw TooLarge("quantize_frequencies: alphabet exceeds the frequency total");
  constexpr double kScale = static_cast<double>(kFrequencyTotal);
  std::vector<std::uint64_t> f(probs.size());
  std::uint64_t total = 0;
  std::size_t most_probable = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!(p >= 0.0) || !std::isfinite(p))
      throw DomainError("quantize_frequencies: probabilities must be finite and >= 0");
    const double scaled = std::nearbyint(std::min(p, 1.0) * kScale);
    f[i] = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(scaled));
    total += f[i];
    if (p > probs[most_probable]) most_probable = i;
  }
  if (total < kFrequencyTotal) {
    f[most_probable] += kFrequencyTotal - total;
    return f;
  }
  while (total > kFrequencyTotal) {
    const auto largest = static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
    const std::uint64_t take = std::min(total - kFrequencyTotal, f[largest] - 1);
    if (take == 0) throw ZeroProbability("quantize_frequencies: cannot keep every count >= 1");
    f[largest] -= take;
    total -= take;
  }
  return f;
}

CodedPattern encode(const Estimator& estimator, const Pattern& pattern) {
  CodedPattern coded;
  coded.estimator = estimator;
  coded.n = pattern.size();
  RangeEncoder encoder(coded.payload);
  for_each_step(estimator, pattern, [&](const std::vector<double>& probs, std::size_t idx) {
    if (!(probs[idx] > 0.0))
      throw ZeroProbability("encode: estimator assigns zero probability at a step");
    const auto f = quantize_frequencies(probs);
    std::uint64_t cum = 0;
    for (std::size_t s = 0; s < idx; ++s) cum += f[s];
    encoder.encode(cum, f[idx]);
  });
  encoder.finish();
  return coded;
}

Pattern decode(const CodedPattern& coded) {
  if (coded.version != kFormatVersion)
    throw UnknownVersion("decode: unsupported version " + std::to_string(coded.version));
  try {
    validate(coded.estimator);
  } catch (const DomainError& e) {
    throw CorruptStream(std::string("decode: invalid estimator parameters: ") + e.what());
  }
  if (coded.n > UINT32_MAX) throw CorruptStream("decode: pattern length too large");
  SequentialPredictor predictor(coded.estimator);
  RangeDecoder decoder(coded.payload);
  PatternBuilder builder(static_cast<std::size_t>(coded.n));
  std::vector<std::uint32_t> counts;
  bool coded_any = false;
  for (std::uint64_t t = 0; t < coded.n; ++t) {
    std::size_t idx = 0;
    if (!counts.empty()) {
      coded_any = true;
      const auto f = quantize_frequencies(step_probs(predictor.law(), counts));
      const std::uint64_t target = decoder.target();
      std::uint64_t cum = 0;
      while (cum + f[idx] <= target) cum += f[idx++];
      decoder.consume(cum, f[idx]);
    }
    if (idx == counts.size()) {
      builder.push_new();
      counts.push_back(1);
      predictor.observe(0);
    } else {
      builder.push_seen(static_cast<Symbol>(idx + 1));
      predictor.observe(counts[idx]++);
    }
  }
  const std::size_t read = coded_any ? decoder.consumed() : 0;
  if (coded.payload.size() > read) throw CorruptStream("decode: trailing bytes after payload");
  return std::move(builder).build();
}

std::vector<std::uint8_t> serialize(const CodedPattern& coded) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(coded.version);
  out.push_back(estimator_id(coded.estimator));
  for (double p : estimator_params(coded.estimator)) put_u64(out, std::bit_cast<std::uint64_t>(p));
  put_u64(out, coded.n);
  put_u64(out, payload_crc(coded.payload), 4);
  out.insert(out.end(), coded.payload.begin(), coded.payload.end());
  return out;
}

CodedPattern parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
    throw CorruptStream("parse: missing PTNC magic");
  CodedPattern coded;
  coded.version = bytes[4];
  if (coded.version != kFormatVersion)
    throw UnknownVersion("parse: unsupported version " + std::to_string(coded.version));
  const std::uint8_t id = bytes[5];
  if (id < 1 || id > 3) throw UnknownVersion("parse: unknown estimator id " + std::to_string(id));
  const std::size_t param_count = id == 1 ? 1 : 2;
  const std::size_t header = 6 + 8 * param_count + 8 + 4;
  if (bytes.size() < header) throw CorruptStream("parse: truncated header");
  std::vector<double> params(param_count);
  for (std::size_t k = 0; k < param_count; ++k)
    params[k] = std::bit_cast<double>(get_u64(bytes, 6 + 8 * k));
  std::size_t at = 6 + 8 * param_count;
  coded.n = get_u64(bytes, at);
  const auto crc = static_cast<std::uint32_t>(get_u64(bytes, at + 8, 4));
  coded.payload.assign(bytes.begin() + header, bytes.end());
  if (payload_crc(coded.payload) != crc) throw CorruptStream("parse: payload checksum mismatch");

  switch (id) {
    case 1: coded.estimator = CrpParams{params[0]}; break;
    case 2: coded.estimator = PyParams{params[0], params[1]}; break;
    default: {
      for (double v : params) {
        if (!(v >= 1.0 && v <= UINT32_MAX) || v != std::floor(v))
          throw CorruptStream("parse: mixture truncation must be a positive integer");
      }
      coded.estimator = MixtureConfig{static_cast<std::uint32_t>(params[0]),
                                      static_cast<std::uint32_t>(params[1])};
    }
  }
  try {
    validate(coded.estimator);
  } catch (const DomainError& e) {
    throw CorruptStream(std::string("parse: invalid estimator parameters: ") + e.what());
  }
  return coded;
}

CodingCost coding_cost(const Estimator& estimator, const Pattern& pattern) {
  CodingCost cost;
  constexpr double kLogTotal = kFrequencyBits * 0.69314718055994530942;
  for_each_step(estimator, pattern, [&](const std::vector<double>& probs, std::size_t idx) {
    cost.model_nats += std::log(probs[idx]);
    const auto f = quantize_frequencies(probs);
    cost.quantized_nats += std::log(static_cast<double>(f[idx])) - kLogTotal;
  });
  return cost;
}

}  // namespace patternpress
