#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oam {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `row` is 1-based and counts every physical line.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : Error("line " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

/// Well-formed input that breaks a domain invariant.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what, std::size_t row = 0)
      : Error(row ? "line " + std::to_string(row) + ": " + what : what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// Undamped response evaluated exactly on a resonance.
class PoleError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  FitError(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace oam
