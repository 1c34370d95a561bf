#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mgtd {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or record. Carries the 1-based line number when known.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A model was applied with a feature configuration it was not trained with.
class FingerprintMismatch : public Error {
 public:
  FingerprintMismatch(const std::string& expected, const std::string& actual)
      : Error("feature fingerprint mismatch: model has " + expected +
              ", extractor has " + actual) {}
};

}  // namespace mgtd
