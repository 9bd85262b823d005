#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfpe {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a coefficient or functional (e.g. eta(r) for r < 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Bad input shape or configuration: grid mismatch, malformed config, unknown preset.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value appeared in a discrete operator.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::size_t index)
      : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// An iterative solve hit its iteration cap; carries the residual history.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace nfpe
