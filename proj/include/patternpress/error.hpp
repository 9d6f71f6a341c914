// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace patternpress {

// Base of every error the library throws. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidPattern : public Error {
 public:
  // position is the 1-based index of the first symbol violating the
  // restricted-growth rule.
  InvalidPattern(std::size_t position, const std::string& what)
      : Error(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

// Input outside the exhaustive/brute-force guard of an operation.
class TooLarge : public Error {
 public:
  using Error::Error;
};

// Arguments outside the domain where a quantity is defined or proven.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ZeroProbability : public Error {
 public:
  using Error::Error;
};

class CorruptStream : public Error {
 public:
  using Error::Error;
};

class UnknownVersion : public Error {
 public:
  using Error::Error;
};

// File system or stream failure. The CLI maps this to exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace patternpress
