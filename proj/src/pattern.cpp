// SPDX-License-Identifier: Apache-2.0
#include "patternpress/pattern.hpp"

#include <algorithm>
#include <charconv>

#include "patternpress/error.hpp"

namespace patternpress {

Pattern Pattern::from_symbols(std::vector<Symbol> symbols) {
  Symbol max_seen = 0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const Symbol s = symbols[i];
    if (s == 0 || s > max_seen + 1) {
      throw InvalidPattern(
          i + 1, "invalid pattern: symbol " + std::to_string(s) +
                     " at position " + std::to_string(i + 1) +
                     " (expected 1.." + std::to_string(max_seen + 1) + ")");
    }
    max_seen = std::max(max_seen, s);
  }
  return Pattern(Unchecked{}, std::move(symbols), max_seen);
}

void PatternBuilder::throw_bad_symbol(Symbol s) const {
  throw DomainError("pattern builder: symbol " + std::to_string(s) +
                    " is not in 1.." + std::to_string(distinct_));
}

Pattern PatternBuilder::build() && {
  const Symbol m = distinct_;
  counts_.clear();
  distinct_ = 0;
  return Pattern(Pattern::Unchecked{}, std::move(symbols_), m);
}

PrevalenceProfile make_profile(
    const std::map<std::uint32_t, std::uint32_t>& counts) {
  PrevalenceProfile p;
  for (auto [mu, phi] : counts) {
    if (mu == 0) throw DomainError("profile: multiplicity 0 is not allowed");
    if (phi == 0) continue;
    p.counts.emplace(mu, phi);
    p.n += std::uint64_t{mu} * phi;
    p.m += phi;
  }
  return p;
}

Pattern extract_pattern(std::span<const std::string> tokens) {
  return extract_pattern_with(tokens);
}

Pattern extract_pattern(std::span<const std::string_view> tokens) {
  return extract_pattern_with(tokens);
}

Pattern extract_pattern(std::span<const std::uint64_t> tokens) {
  return extract_pattern_with(tokens);
}

std::vector<std::uint32_t> multiplicities(const Pattern& pattern) {
  std::vector<std::uint32_t> mult(pattern.distinct(), 0);
  for (Symbol s : pattern.symbols()) ++mult[s - 1];
  return mult;
}

PrevalenceProfile profile_from_multiplicities(
    std::span<const std::uint32_t> mult) {
  PrevalenceProfile p;
  for (auto mu : mult) {
    if (mu == 0) continue;
    ++p.counts[mu];
    p.n += mu;
    ++p.m;
  }
  return p;
}

PrevalenceProfile profile(const Pattern& pattern) {
  return profile_from_multiplicities(multiplicities(pattern));
}

PatternEnumerator::PatternEnumerator(std::size_t n) : n_(n) {
  if (n > kMaxEnumerationLength) {
    throw TooLarge("enumerate_patterns: n = " + std::to_string(n) +
                   " exceeds the guard " +
                   std::to_string(kMaxEnumerationLength));
  }
}

bool PatternEnumerator::next() {
  if (done_) return false;
  if (!started_) {
    started_ = true;
    current_.assign(n_, 1);
    prefix_max_.assign(n_, 1);
    if (n_ <= 1) done_ = true;
    return true;
  }
  // Rightmost position that can still grow; everything after resets to 1.
  std::size_t i = n_ - 1;
  while (i > 0 && current_[i] > prefix_max_[i - 1]) --i;
  if (i == 0) {
    done_ = true;
    return false;
  }
  ++current_[i];
  prefix_max_[i] = std::max(prefix_max_[i - 1], current_[i]);
  for (std::size_t j = i + 1; j < n_; ++j) {
    current_[j] = 1;
    prefix_max_[j] = prefix_max_[i];
  }
  return true;
}

Pattern PatternEnumerator::pattern() const {
  return Pattern::from_symbols(current_);
}

std::vector<Pattern> enumerate_patterns(std::size_t n) {
  std::vector<Pattern> out;
  PatternEnumerator e(n);
  while (e.next()) out.push_back(e.pattern());
  return out;
}

std::string format_pattern(const Pattern& pattern) {
  std::string out;
  out.reserve(pattern.size() * 3);
  char buf[16];
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (i) out.push_back(' ');
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, pattern[i]);
    out.append(buf, end);
  }
  return out;
}

Pattern parse_pattern(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<Symbol> symbols;
  std::size_t pos = 0;
  while (pos < line.size()) {
    Symbol value = 0;
    auto [end, ec] =
        std::from_chars(line.data() + pos, line.data() + line.size(), value);
    if (ec != std::errc{} || end == line.data() + pos) {
      throw DomainError("pattern text: expected a decimal symbol at column " +
                        std::to_string(pos + 1));
    }
    symbols.push_back(value);
    pos = static_cast<std::size_t>(end - line.data());
    if (pos < line.size()) {
      if (line[pos] != ' ' || pos + 1 == line.size()) {
        throw DomainError(
            "pattern text: symbols must be separated by single spaces "
            "(column " +
            std::to_string(pos + 1) + ")");
      }
      ++pos;
    }
  }
  return Pattern::from_symbols(std::move(symbols));
}

}  // namespace patternpress
