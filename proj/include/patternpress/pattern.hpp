// SPDX-License-Identifier: Apache-2.0
//
// Patterns (restricted-growth strings) and their prevalence profiles.
//
// The pattern of a sequence replaces every token by the order in which it
// first appeared: FEDERER -> 1 2 3 2 4 2 4. All estimators in this library
// score patterns, and most of them only depend on the prevalence profile
// {phi_mu}: the number of distinct symbols that occur exactly mu times.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace patternpress {

using Symbol = std::uint32_t;

class Pattern {
 public:
  Pattern() = default;

  // Validates the restricted-growth invariants; throws InvalidPattern.
  static Pattern from_symbols(std::vector<Symbol> symbols);

  std::span<const Symbol> symbols() const noexcept { return symbols_; }
  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  // Number of distinct symbols m (equal to the largest symbol).
  Symbol distinct() const noexcept { return distinct_; }
  Symbol operator[](std::size_t i) const noexcept { return symbols_[i]; }

  friend bool operator==(const Pattern&, const Pattern&) = default;

 private:
  struct Unchecked {};
  Pattern(Unchecked, std::vector<Symbol> symbols, Symbol distinct)
      : symbols_(std::move(symbols)), distinct_(distinct) {}

  friend class PatternBuilder;

  std::vector<Symbol> symbols_;
  Symbol distinct_ = 0;
};

// Appends symbols one at a time while maintaining the pattern invariants.
// Used by the samplers and the decoder, which generate patterns step by step.
class PatternBuilder {
 public:
  PatternBuilder() = default;
  explicit PatternBuilder(std::size_t reserve) { symbols_.reserve(reserve); }

  // Appends an existing symbol in [1, distinct()]; out-of-range symbols are
  // a caller bug and throw DomainError.
  void push_seen(Symbol s) {
    if (s == 0 || s > distinct_) throw_bad_symbol(s);
    symbols_.push_back(s);
    ++counts_[s - 1];
  }
  // Appends symbol distinct()+1 and returns it.
  Symbol push_new() {
    symbols_.push_back(++distinct_);
    counts_.push_back(1);
    return distinct_;
  }

  std::size_t size() const noexcept { return symbols_.size(); }
  Symbol distinct() const noexcept { return distinct_; }
  // counts()[s-1] is the multiplicity of symbol s so far.
  std::span<const std::uint32_t> counts() const noexcept { return counts_; }

  Pattern build() &&;

 private:
  [[noreturn]] void throw_bad_symbol(Symbol s) const;

  std::vector<Symbol> symbols_;
  std::vector<std::uint32_t> counts_;
  Symbol distinct_ = 0;
};

struct PrevalenceProfile {
  // multiplicity mu -> prevalence phi_mu; only phi_mu > 0 is stored.
  std::map<std::uint32_t, std::uint32_t> counts;
  std::uint64_t n = 0;
  std::uint32_t m = 0;

  friend bool operator==(const PrevalenceProfile&,
                         const PrevalenceProfile&) = default;
};

// Builds a profile from {mu: phi_mu} and fills n and m. Zero entries are
// dropped; a zero multiplicity key throws DomainError.
PrevalenceProfile make_profile(const std::map<std::uint32_t, std::uint32_t>& counts);

template <class Token, class Hash = std::hash<Token>,
          class Eq = std::equal_to<Token>>
Pattern extract_pattern_with(std::span<const Token> tokens, Hash hash = {},
                             Eq eq = {}) {
  std::unordered_map<Token, Symbol, Hash, Eq> index(tokens.size() / 2 + 1, hash,
                                                    eq);
  PatternBuilder out(tokens.size());
  for (const auto& t : tokens) {
    auto [it, inserted] = index.try_emplace(t, out.distinct() + 1);
    if (inserted)
      out.push_new();
    else
      out.push_seen(it->second);
  }
  return std::move(out).build();
}

Pattern extract_pattern(std::span<const std::string> tokens);
Pattern extract_pattern(std::span<const std::string_view> tokens);
Pattern extract_pattern(std::span<const std::uint64_t> tokens);

// Throws InvalidPattern{position} at the first (1-based) violating index.
inline Pattern validate_pattern(std::vector<Symbol> symbols) {
  return Pattern::from_symbols(std::move(symbols));
}

// multiplicities(p)[s-1] = number of occurrences of symbol s.
std::vector<std::uint32_t> multiplicities(const Pattern& pattern);

PrevalenceProfile profile(const Pattern& pattern);
PrevalenceProfile profile_from_multiplicities(std::span<const std::uint32_t> mult);

inline constexpr std::size_t kMaxEnumerationLength = 14;

// Streams every length-n pattern once, in lexicographic order. Throws
// TooLarge when n > kMaxEnumerationLength.
class PatternEnumerator {
 public:
  explicit PatternEnumerator(std::size_t n);

  // Advances to the next pattern; false once the stream is exhausted. The
  // first call yields the all-ones pattern (or the empty pattern for n = 0).
  bool next();
  std::span<const Symbol> current() const noexcept { return current_; }
  Pattern pattern() const;

 private:
  std::size_t n_;
  bool started_ = false;
  bool done_ = false;
  std::vector<Symbol> current_;
  // prefix_max_[i] = max(current_[0..i]).
  std::vector<Symbol> prefix_max_;
};

template <class Fn>
void for_each_pattern(std::size_t n, Fn&& fn) {
  PatternEnumerator e(n);
  while (e.next()) fn(e.current());
}

std::vector<Pattern> enumerate_patterns(std::size_t n);

// Pattern text format: ASCII decimal symbols separated by single spaces.
// The empty pattern is the empty line.
std::string format_pattern(const Pattern& pattern);
// Parses one line (without the newline). Throws InvalidPattern on a bad
// symbol sequence and DomainError on malformed text.
Pattern parse_pattern(std::string_view line);

}  // namespace patternpress
